#!/usr/bin/env python3
"""Closed-form normal-equation solves, checked and timed.

Every iteration of the LP solvers inverts the Gram matrix A A* of the
constraint operator.  For the barycenter and transport constraint
structure this inverse has a closed form built from block averages and
one rank-one correction, so the solve costs a handful of vector passes
instead of a factorization.  This demo

- probes the Gram matrix column by column through the matrix-free
  kernels and checks the closed-form solve against dense linalg,
- does the same for the transport (single-plan) variant,
- counts the flops actually spent and times a large solve.
"""

import time

import numpy as np

import barylp
from barylp.normal import dense_gram


def main():
    rng = np.random.default_rng(0)

    print("=== Barycenter normal solve vs dense factorization ===")
    for m, m_ts in [(2, (1,)), (5, (3, 4)), (8, (6, 2, 7)), (10, (10,) * 4)]:
        dims = barylp.Dims(m, m_ts)
        # dense_gram probes A A* with unit vectors through the
        # matrix-free kernels; only viable at small sizes.
        G = dense_gram(dims)
        R = rng.standard_normal(dims.M)
        y = barylp.solve_wbp_normal(dims, R)
        err = np.linalg.norm(G @ y - R)
        print(f"m={m:3d} m_t={str(m_ts):16s} M={dims.M:4d}  "
              f"||AA*y - R|| = {err:.3e}")

    print("\n=== Transport normal solve ===")
    for m_u, m_v in [(2, 1), (4, 6), (9, 9), (12, 3)]:
        # Probe the transport Gram matrix the same way.
        M = m_v + m_u - 1
        G = np.empty((M, M))
        e = np.zeros(M)
        for j in range(M):
            e[j] = 1.0
            G[:, j] = barylp.apply_ot_A(
                m_u, m_v, barylp.apply_ot_Astar(m_u, m_v, e))
            e[j] = 0.0
        R = rng.standard_normal(M)
        y = barylp.solve_ot_normal(m_u, m_v, R)
        err = np.linalg.norm(G @ y - R)
        print(f"m_u={m_u:3d} m_v={m_v:3d} M={M:4d}  ||AA*y - R|| = {err:.3e}")

    # Large instance: the solve is linear in T*m + sum(m_t), so even a
    # million-variable system is microseconds of work.
    print("\n=== Cost of a large solve ===")
    T, m, m_t = 100, 100, 100
    dims = barylp.Dims(m, (m_t,) * T)
    print(f"T={T}, m={m}, m_t={m_t}: {dims.N} primal variables, "
          f"{dims.M} normal-equation rows")

    flops = barylp.FlopCounter()
    work = barylp.NormalWorkspace(dims)
    R = rng.standard_normal(dims.M)
    out = np.empty(dims.M)
    barylp.solve_wbp_normal(dims, R, out=out, work=work, flops=flops)
    print(f"flops per solve: {flops.count} "
          f"(budget 7Tm + 3 sum(m_t) + O(T) = {7 * T * m + 3 * T * m_t}"
          f" + O(T))")

    reps = 200
    start = time.perf_counter()
    for _ in range(reps):
        barylp.solve_wbp_normal(dims, R, out=out, work=work)
    elapsed = time.perf_counter() - start
    print(f"time per solve:  {1e6 * elapsed / reps:.1f} us "
          f"({reps} repetitions)")


if __name__ == "__main__":
    main()
