"""Closed-form solvers for the operator normal equations ``A A* y = R``.

For the barycenter constraint operator the Gram matrix ``A A*`` has an
arrow-like block structure whose inverse is available in closed form, so
the system is solved exactly in one linear-time sweep over the blocks:
roughly ``7*T*m + 3*sum(m_t)`` flops, with no factorization and no fill-in.
The transport (two-marginal) variant is even simpler and costs
``O(m_u + m_v)`` beyond the two block sums.

These solves are the only linear algebra inside the splitting solvers, so
they are written workspace-first: every buffer can be supplied by the
caller and the hot path allocates nothing.
"""

import numpy as np

from .problem import apply_A, apply_Astar

__all__ = [
    "NormalWorkspace",
    "solve_wbp_normal",
    "solve_ot_normal",
    "project_affine",
    "dense_gram",
]


class NormalWorkspace:
    """Preallocated scratch for :func:`solve_wbp_normal`.

    Holds two ``(m-1)``-vectors plus the per-block reciprocals ``1/m_t``
    and the harmonic factor ``mbar = 1 / (1 + sum_t 1/m_t)``, which depend
    only on the block sizes and are reused across calls.
    """

    __slots__ = ("dims", "yhat2", "acc", "alphas", "block_sums", "inv_mt",
                 "mbar")

    def __init__(self, dims):
        self.dims = dims
        self.yhat2 = np.empty(dims.m - 1)
        self.acc = np.empty(dims.m - 1)
        self.alphas = np.empty(dims.T)
        self.block_sums = np.empty(dims.T)
        self.inv_mt = np.array([1.0 / mt for mt in dims.m_ts])
        self.mbar = 1.0 / (1.0 + self.inv_mt.sum())


def solve_wbp_normal(dims, rhs, out=None, work=None, flops=None):
    """Solve ``A A* y = rhs`` for the barycenter constraint operator.

    Parameters
    ----------
    dims : Dims
        Block layout of the instance.
    rhs : ndarray, shape (M,)
        Right-hand side, laid out like a dual vector.
    out : ndarray, shape (M,), optional
        Solution buffer; allocated when omitted.  May not alias ``rhs``.
    work : NormalWorkspace, optional
        Scratch; allocated when omitted.
    flops : FlopCounter, optional

    Returns
    -------
    ndarray
        The exact solution ``y`` (same array as ``out`` when given).

    Notes
    -----
    Writing ``alpha_t = sum(R2^t) - sum(R1^t) + R3`` and
    ``yhat2^t = R2^t + alpha_t``, the middle block is

        y2^t = (yhat2^t - mbar * sum_u yhat2^u / m_u) / m_t,

    after which ``y1^t = R1^t / m - (sum(y2^t) / m) 1`` and
    ``y3 = (R3 + sum(y2)) / m`` follow by back-substitution.
    """
    if out is None:
        out = np.empty(dims.M)
    elif np.may_share_memory(out, rhs):
        raise ValueError("out may not alias rhs")
    if work is None:
        work = NormalWorkspace(dims)
    m = dims.m
    inv_m = 1.0 / m
    r3 = rhs[dims.y3_index]
    acc = work.acc
    yhat2 = work.yhat2
    alphas = work.alphas

    mt = dims.uniform_mt
    if mt is not None and rhs.flags.c_contiguous and out.flags.c_contiguous:
        # All blocks share one size: batch both sweeps.
        T = dims.T
        inv_mt = work.inv_mt[0]
        R1 = rhs[:T * mt].reshape(T, mt)
        R2 = rhs[dims.M1:dims.M1 + T * (m - 1)].reshape(T, m - 1)
        sums = work.block_sums
        np.sum(R1, axis=1, out=sums)
        np.sum(R2, axis=1, out=alphas)
        alphas -= sums
        alphas += r3
        np.sum(R2, axis=0, out=acc)
        acc += alphas.sum()
        acc *= work.mbar * inv_mt
        Y2 = out[dims.M1:dims.M1 + T * (m - 1)].reshape(T, m - 1)
        np.add(R2, alphas[:, None], out=Y2)
        Y2 -= acc
        Y2 *= inv_mt
        np.sum(Y2, axis=1, out=sums)
        y2_total = sums.sum()
        Y1 = out[:T * mt].reshape(T, mt)
        np.multiply(R1, inv_m, out=Y1)
        sums *= inv_m
        Y1 -= sums[:, None]
        out[dims.y3_index] = (r3 + y2_total) * inv_m
        if flops is not None:
            flops.add(7 * dims.T * m + 3 * dims.sum_mt + 8 * dims.T + 4)
        return out

    # First sweep: accumulate the coupling term mbar * sum_t yhat2^t / m_t.
    acc[:] = 0.0
    for t in range(dims.T):
        r1 = dims.y1_view(rhs, t)
        r2 = dims.y2_view(rhs, t)
        alpha = r2.sum() - r1.sum() + r3
        alphas[t] = alpha
        np.add(r2, alpha, out=yhat2)
        yhat2 *= work.mbar * work.inv_mt[t]
        acc += yhat2

    # Second sweep: y2, then y1 and the y3 accumulator per block.
    y2_total = 0.0
    for t in range(dims.T):
        r1 = dims.y1_view(rhs, t)
        r2 = dims.y2_view(rhs, t)
        y2 = dims.y2_view(out, t)
        np.add(r2, alphas[t], out=y2)
        y2 -= acc
        y2 *= work.inv_mt[t]
        st = y2.sum()
        y2_total += st
        y1 = dims.y1_view(out, t)
        np.multiply(r1, inv_m, out=y1)
        y1 -= st * inv_m
    out[dims.y3_index] = (r3 + y2_total) * inv_m
    if flops is not None:
        # Per block: two block sums, the shifted copy, the scaled
        # accumulation, the y2 recombination, its sum, and the y1 update.
        flops.add(7 * dims.T * m + 3 * dims.sum_mt + 8 * dims.T + 4)
    return out


def solve_ot_normal(m_u, m_v, rhs, out=None, flops=None):
    """Solve ``A A* y = rhs`` for the transport constraint operator.

    ``rhs`` stacks ``(R1; R2)`` with ``R1`` of length ``m_v`` and ``R2``
    of length ``m_u - 1``; ``m_u >= 2`` is required.  The solution is

        y1 = R1/m_u + ((m_u-1)/m_u * sum(R1) - sum(R2)) / m_v,
        y2 = R2/m_v + (sum(R2) - sum(R1)) / m_v.
    """
    if m_u < 2:
        raise ValueError("m_u must be at least 2")
    if out is None:
        out = np.empty(m_v + m_u - 1)
    elif np.may_share_memory(out, rhs):
        raise ValueError("out may not alias rhs")
    r1 = rhs[:m_v]
    r2 = rhs[m_v:]
    s1 = r1.sum()
    s2 = r2.sum()
    inv_mv = 1.0 / m_v
    np.multiply(r1, 1.0 / m_u, out=out[:m_v])
    out[:m_v] += ((m_u - 1.0) / m_u * s1 - s2) * inv_mv
    np.multiply(r2, inv_mv, out=out[m_v:])
    out[m_v:] += (s2 - s1) * inv_mv
    if flops is not None:
        flops.add(3 * m_v + 3 * (m_u - 1) + 8)
    return out


def project_affine(dims, b, z, out=None, work=None, flops=None):
    """Project ``z`` onto the affine set ``{x : A x = b}``.

    Computes ``z - A* (A A*)^{-1} (A z - b)`` with the closed-form normal
    solve; used for feasibility checks and as the exact affine step of
    splitting demos.
    """
    if out is None:
        out = np.empty(dims.N)
    resid = apply_A(dims, z, flops=flops)
    resid -= b
    y = solve_wbp_normal(dims, resid, work=work, flops=flops)
    apply_Astar(dims, y, out=out, flops=flops)
    np.subtract(z, out, out=out)
    if flops is not None:
        flops.add(dims.M + dims.N)
    return out


def dense_gram(dims, apply_A_fn=None, apply_Astar_fn=None):
    """Densify ``A A*`` by applying the operators to basis vectors.

    Debug helper for small block sizes; quadratic in ``M``, do not call
    on production-scale instances.
    """
    if apply_A_fn is None:
        apply_A_fn = lambda v: apply_A(dims, v)
    if apply_Astar_fn is None:
        apply_Astar_fn = lambda w: apply_Astar(dims, w)
    M = dims.M
    G = np.empty((M, M))
    e = np.zeros(M)
    for j in range(M):
        e[j] = 1.0
        G[:, j] = apply_A_fn(apply_Astar_fn(e))
        e[j] = 0.0
    return G
