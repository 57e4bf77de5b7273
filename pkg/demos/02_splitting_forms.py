#!/usr/bin/env python3
"""Three equivalent formulations of the anchored splitting iteration.

The solver is derived three times over: as a fixed-point iteration on
resolvent operators, as an alternating minimization of an augmented
Lagrangian written in the governing variable, and as the lean production
recursion that the LP engine actually runs.  All three produce the same
iterates in exact arithmetic.  This demo

- builds the two-block dual form of a small barycenter LP,
- runs the three formulations in lockstep and reports the worst
  deviation across 300 iterations,
- shows the anchor weight schedule and the fixed-point gap decaying at
  the advertised O(1/k) rate.
"""

import numpy as np

import barylp


def build_two_block(instance):
    """Wrap an instance's LP data as a generic two-block problem."""
    b, c, dims = barylp.lp_data(instance)
    work = barylp.NormalWorkspace(dims)
    prob = barylp.make_dual_lp_problem(
        b, c,
        lambda v: barylp.apply_A(dims, v),
        lambda w: barylp.apply_Astar(dims, w),
        lambda rhs: barylp.solve_wbp_normal(dims, rhs, work=work),
    )
    return prob, dims


def main():
    config = barylp.SyntheticConfig(T=3, m=8, m_t=(5, 7, 6), d=2, seed=3)
    instance = barylp.generate_synthetic(config)
    prob, dims = build_two_block(instance)
    print(f"two-block dual form: y in R^{dims.M}, s in R^{dims.N}\n")

    # Lockstep check: resolvent form vs augmented-Lagrangian form vs
    # the lean recursion, same start, 300 iterations.
    worst = barylp.verify_equivalence(prob, sigma=1.0, n_iters=300)
    print("=== Formulation equivalence ===")
    print(f"worst deviation over 300 iterations: {worst:.3e}")
    print("(zero up to floating-point roundoff)\n")

    # The anchor weight pulls each iterate back toward the start point
    # with weight 1/(k+2), the schedule behind the O(1/k) rate.
    print("=== Anchor schedule ===")
    ks = [0, 1, 2, 10, 100, 1000]
    print("k        :", "  ".join(f"{k:>7d}" for k in ks))
    print("weight   :", "  ".join(f"{barylp.halpern_weight(k):7.5f}" for k in ks))
    print()

    # Fixed-point gap along an actual solve.  The gap between successive
    # governing-sequence points shrinks like 1/k; multiplying by the
    # iteration index should therefore stay bounded.
    gaps = []

    def watch(k, x, y, s, extras):
        gaps.append(extras["fixed_point_gap"])

    options = barylp.SolverOptions(
        kkt_tol=0.0, max_iters=2000, restart=False, on_iteration=watch
    )
    barylp.solve_hpr(instance, options)

    print("=== Fixed-point gap decay (restarts off) ===")
    print(f"{'iter':>6s} {'gap':>12s} {'iter * gap':>12s}")
    for k in (1, 10, 100, 500, 1000, 2000):
        print(f"{k:6d} {gaps[k - 1]:12.4e} {k * gaps[k - 1]:12.4e}")
    sup = max((k + 1) * g for k, g in enumerate(gaps))
    print(f"\nsup over the run of (k+1) * gap = {sup:.4f} (bounded)")


if __name__ == "__main__":
    main()
