#!/usr/bin/env python3
"""Exact LP barycenters vs the entropic scaling baseline.

Iterative Bregman projection (IBP) smooths the transport objective with
an entropy term of strength epsilon and runs cheap alternating scaling
sweeps.  It is fast but biased: the smaller epsilon, the closer its
answer gets to the LP optimum, at the price of slower convergence and
eventual underflow unless the sweeps run in log space.  This demo

- solves one instance exactly with the LP solver,
- runs IBP at a ladder of temperatures,
- reports objective gaps against the exact optimum and the marginal
  feasibility error of the scaled plans.
"""

import numpy as np

import barylp


def main():
    config = barylp.SyntheticConfig(T=4, m=20, m_t=25, d=3, seed=12)
    instance = barylp.generate_synthetic(config)

    print("solving the LP exactly ...")
    lp = barylp.solve_hpr(instance, barylp.SolverOptions(kkt_tol=1e-9,
                                                         max_iters=50000))
    print(f"  {lp.iterations} iterations, kkt {lp.kkt.max:.1e}, "
          f"objective {lp.primal_obj:.10f}\n")

    print(f"{'epsilon':>8s} {'sweeps':>7s} {'objective':>13s} "
          f"{'rel gap':>10s} {'marg err':>10s} {'secs':>6s}")

    # A fixed sweep budget with the tolerance disabled: at small epsilon
    # the weight-change signal can stall long before the scalings
    # equilibrate, so run every temperature to full convergence.
    for eps in (0.1, 0.01, 0.001):
        opts = barylp.IbpOptions(epsilon=eps, tol=0.0, max_iters=20000,
                                 check_every=20000, log_domain=True)
        rep = barylp.solve_ibp(instance, opts)
        gap = abs(rep.primal_obj - lp.primal_obj) / (abs(lp.primal_obj) + 1)
        print(f"{eps:8g} {rep.iterations:7d} {rep.primal_obj:13.8f} "
              f"{gap:10.2e} {rep.marginal_error:10.2e} "
              f"{rep.elapsed_secs:6.2f}")

    print("\nThe entropic bias shrinks roughly linearly with epsilon;")
    print("the LP solver needs no temperature parameter at all.")

    # Where the answers differ: compare weight vectors at eps = 0.01.
    opts = barylp.IbpOptions(epsilon=0.01, tol=0.0, max_iters=20000,
                             check_every=20000, log_domain=True)
    rep = barylp.solve_ibp(instance, opts)
    diff = np.abs(rep.barycenter - lp.barycenter)
    print(f"\nbarycenter disagreement at eps=0.01: "
          f"max {diff.max():.4f}, mean {diff.mean():.4f}")
    print("(entropy spreads mass across nearby support points; the LP")
    print("solution sits on a vertex and concentrates it)")


if __name__ == "__main__":
    main()
