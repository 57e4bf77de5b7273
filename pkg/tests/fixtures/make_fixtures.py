"""Build the committed test fixtures.

Run from anywhere:  python3 tests/fixtures/make_fixtures.py

Produces, next to this script:

* ``tiny_reference.npz``: for the canonical seeded tiny instance, the
  anchored-method governing-sequence limit ``eta_star`` taken from a
  literal 1e6-iteration restart-free run, plus a polished high-accuracy
  LP solution ``(x_star, y_star, s_star)`` from the external oracle.
  The run limit is certified as a genuine fixed point (tiny fixed-point
  gap and KKT residual at the final iterate); it need not coincide with
  the polished vertex, because the fixed-point set of a degenerate LP
  is not a singleton and the anchored run converges to the projection
  of its own starting point.  On this instance the two differ by about
  1.6e-3 while both satisfy the optimality conditions; the rate tests
  use the run limit, which is the tighter (stricter) reference.
* ``quality_oracle.json``: exact-oracle objective values for the tiny
  and the quality-criterion instances, with instance checksums so the
  tests can detect generator drift.

Rebuilding takes a few minutes (the reference run is genuinely 1e6
iterations).
"""

import json
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import barylp
from barylp.solvers import SolverOptions, _Engine
from oracles import (dense_instance_A, instance_checksums, kkt_norms_dense,
                     quality_instance, solve_lp_oracle, tiny_instance)

HERE = os.path.dirname(os.path.abspath(__file__))
SIGMA = 1.0
REFERENCE_ITERS = 1_000_000


def polished_solution(instance, label):
    b, c, dims = barylp.lp_data(instance)
    A = dense_instance_A(instance)
    x, y, s, obj = solve_lp_oracle(b, c, A)
    norms = kkt_norms_dense(A, b, c, x, y, s)
    print(f"[{label}] oracle objective {obj:.12e}, raw KKT norms "
          + ", ".join(f"{v:.2e}" for v in norms))
    if max(norms) > 1e-9:
        raise SystemExit(
            f"{label}: polished oracle solution is not accurate enough "
            f"(raw KKT {max(norms):.3e}); investigate before committing"
        )
    return x, y, s, obj


def reference_run(instance, n_iters):
    eng = _Engine(instance, SolverOptions(sigma=SIGMA, restart=False))
    t0 = time.perf_counter()
    slack = np.inf
    for k in range(1, n_iters + 1):
        slack = eng.hpr_iteration()
        if k % 100_000 == 0:
            print(f"  reference run {k}/{n_iters}, "
                  f"fixed-point gap {2 * SIGMA * slack:.3e}, "
                  f"{time.perf_counter() - t0:.1f}s")
    eta = eng.xhat - SIGMA * eng.u
    return eta, eng.x.copy(), eng.s.copy(), 2 * SIGMA * slack, \
        eng.residual().max


def main():
    tiny = tiny_instance()
    b, c, dims = barylp.lp_data(tiny)
    x_star, y_star, s_star, obj_tiny = polished_solution(tiny, "tiny")

    print(f"reference run: {REFERENCE_ITERS} anchored iterations, "
          f"restarts off, sigma={SIGMA}")
    eta_star, x_run, s_run, final_gap, final_kkt = reference_run(
        tiny, REFERENCE_ITERS
    )
    eta_polished = x_star - SIGMA * s_star
    drift = float(np.linalg.norm(eta_star - eta_polished))
    scale = 1.0 + float(np.linalg.norm(eta_polished))
    print(f"run limit vs polished fixed point: ||diff|| = {drift:.3e} "
          f"(scale {scale:.3e}), final gap {final_gap:.3e}, "
          f"final relative KKT {final_kkt:.3e}")
    # Certify the run limit is itself (numerically) a fixed point: the
    # final application of the governing operator barely moves it and
    # the induced primal-dual triple satisfies the optimality system.
    if final_gap > 2e-5 or final_kkt > 1e-6:
        raise SystemExit(
            "reference run has not converged to a fixed point; "
            "investigate before committing fixtures"
        )
    if drift > 1e-2 * scale:
        raise SystemExit(
            "reference run limit is implausibly far from the polished "
            "optimal face; investigate before committing fixtures"
        )

    eta0 = -SIGMA * c
    np.savez(
        os.path.join(HERE, "tiny_reference.npz"),
        eta_star=eta_star,
        eta_polished=eta_polished,
        eta0=eta0,
        x_star=x_star,
        y_star=y_star,
        s_star=s_star,
        # Limit point of the run's own primal/slack sequences, taken as
        # the final iterate of the converged reference run.
        x_run=x_run,
        s_run=s_run,
        sigma=np.float64(SIGMA),
        reference_iters=np.int64(REFERENCE_ITERS),
        final_gap=np.float64(final_gap),
        objective=np.float64(obj_tiny),
        b_sum=np.float64(b.sum()),
        c_sum=np.float64(c.sum()),
    )
    print("wrote tiny_reference.npz")

    quality = quality_instance()
    _, _, _, obj_quality = polished_solution(quality, "quality")
    payload = {
        "tiny": {
            "objective": obj_tiny,
            "checksums": instance_checksums(tiny),
        },
        "quality": {
            "objective": obj_quality,
            "checksums": instance_checksums(quality),
        },
    }
    with open(os.path.join(HERE, "quality_oracle.json"), "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    print("wrote quality_oracle.json")


if __name__ == "__main__":
    main()
