"""Fixed-support Wasserstein barycenter problems in LP form.

A barycenter instance couples ``T`` discrete distributions with a common
candidate support of size ``m`` through transport plans ``X^t`` of shape
``(m, m_t)`` and barycenter weights ``a`` of length ``m``.  Stacking the
column-vectorized plans and the weights gives the primal variable

    x = (vec(X^1); ...; vec(X^T); a),      length N = m*sum(m_t) + m,

and the instance becomes the standard-form LP

    min <c, x>   s.t.   A x = b,  x >= 0,

where the equality block enforces the sample-side marginals of every plan,
ties every plan's barycenter-side marginal to ``a`` (with the first row of
each tie dropped so that ``A`` has full row rank), and normalizes ``a`` to
the simplex.  The dual variable splits as y = (y1 blocks; y2 blocks; y3)
of total length M = sum(m_t) + T*(m-1) + 1.

Everything here is matrix-free: ``A`` and its adjoint are applied in
O(N) time through :func:`apply_A` / :func:`apply_Astar`, and the KKT
residuals of a candidate primal-dual triple come from
:func:`kkt_residual`.  ``A`` itself is never formed.
"""

import numpy as np

__all__ = [
    "DiscreteDistribution",
    "WbpInstance",
    "Dims",
    "PrimalVector",
    "DualVector",
    "lp_data",
    "apply_A",
    "apply_Astar",
    "project_nonneg",
    "primal_objective",
    "dual_objective",
    "kkt_terms_raw",
    "kkt_residual",
    "KktResidual",
]

_SIMPLEX_TOL = 1e-8


class DiscreteDistribution:
    """A finitely supported probability distribution.

    Parameters
    ----------
    weights : array_like, shape (m_t,)
        Nonnegative weights summing to one.
    support : array_like, shape (m_t, d)
        Support point coordinates, one row per atom.
    """

    def __init__(self, weights, support):
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        support = np.ascontiguousarray(support, dtype=np.float64)
        if support.ndim == 1:
            support = support[:, None]
        if weights.ndim != 1 or support.ndim != 2:
            raise ValueError("weights must be 1-d and support 2-d")
        if weights.shape[0] != support.shape[0]:
            raise ValueError(
                f"{weights.shape[0]} weights but {support.shape[0]} support points"
            )
        if weights.shape[0] == 0:
            raise ValueError("empty distribution")
        if np.any(weights < 0):
            raise ValueError("negative weight in distribution")
        total = weights.sum()
        if abs(total - 1.0) > _SIMPLEX_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        self.weights = weights
        self.support = support

    @property
    def size(self):
        return self.weights.shape[0]

    @property
    def dim(self):
        return self.support.shape[1]

    def __repr__(self):
        return f"DiscreteDistribution(size={self.size}, dim={self.dim})"


class WbpInstance:
    """A fixed-support barycenter problem.

    Parameters
    ----------
    distributions : sequence of DiscreteDistribution
        The ``T`` sample distributions.
    omega : array_like, shape (T,)
        Nonnegative barycenter weights summing to one.
    cost : sequence of ndarray
        Per-distribution cost matrices ``D^t`` of shape ``(m, m_t)``.
        These are the matrices that enter the objective directly, i.e.
        they already include the ``omega_t`` factor; see
        :func:`barylp.datagen.build_cost` for the unweighted ground costs.
    bary_support : ndarray, shape (m, d), optional
        Coordinates of the candidate barycenter support.  Optional because
        the LP only needs the cost matrices.

    Notes
    -----
    ``m == 1`` is rejected: with a single barycenter atom the weight
    normalization row would duplicate the (dropped) marginal ties and the
    constraint matrix would lose full row rank.
    """

    def __init__(self, distributions, omega, cost, bary_support=None):
        distributions = list(distributions)
        if not distributions:
            raise ValueError("need at least one distribution")
        omega = np.ascontiguousarray(omega, dtype=np.float64)
        if omega.shape != (len(distributions),):
            raise ValueError("omega length must equal the number of distributions")
        if np.any(omega < 0) or abs(omega.sum() - 1.0) > _SIMPLEX_TOL:
            raise ValueError("omega must be nonnegative and sum to 1")
        cost = [np.ascontiguousarray(C, dtype=np.float64) for C in cost]
        if len(cost) != len(distributions):
            raise ValueError("one cost matrix per distribution required")
        m = cost[0].shape[0]
        if m < 2:
            raise ValueError("barycenter support must have at least 2 points")
        for t, (C, dist) in enumerate(zip(cost, distributions)):
            if C.ndim != 2 or C.shape != (m, dist.size):
                raise ValueError(
                    f"cost[{t}] has shape {C.shape}, expected {(m, dist.size)}"
                )
        if bary_support is not None:
            bary_support = np.ascontiguousarray(bary_support, dtype=np.float64)
            if bary_support.ndim == 1:
                bary_support = bary_support[:, None]
            if bary_support.shape[0] != m:
                raise ValueError("bary_support row count must match cost rows")
        self.distributions = distributions
        self.omega = omega
        self.cost = cost
        self.bary_support = bary_support

    @property
    def T(self):
        return len(self.distributions)

    @property
    def m(self):
        return self.cost[0].shape[0]

    @property
    def m_ts(self):
        return tuple(d.size for d in self.distributions)

    def dims(self):
        return Dims(self.m, self.m_ts)

    def __repr__(self):
        return f"WbpInstance(T={self.T}, m={self.m}, m_ts={self.m_ts})"


class Dims:
    """Block layout of the primal/dual vectors of an instance.

    Precomputes the offsets of every plan block inside the primal vector
    and of every dual block inside the dual vector, so that kernels can
    slice views without recomputing prefix sums.
    """

    __slots__ = (
        "m", "m_ts", "T", "sum_mt", "N", "M1", "M2", "M", "uniform_mt",
        "plan_offsets", "bary_offset", "y1_offsets", "y2_offsets", "y3_index",
    )

    def __init__(self, m, m_ts):
        m = int(m)
        m_ts = tuple(int(v) for v in m_ts)
        if m < 2:
            raise ValueError("m must be at least 2")
        if not m_ts or any(v < 1 for v in m_ts):
            raise ValueError("every sample distribution needs at least one atom")
        self.m = m
        self.m_ts = m_ts
        self.T = len(m_ts)
        self.sum_mt = sum(m_ts)
        self.N = m * self.sum_mt + m
        self.M1 = self.sum_mt
        self.M2 = self.T * (m - 1)
        self.M = self.M1 + self.M2 + 1
        plan_offsets = []
        off = 0
        for mt in m_ts:
            plan_offsets.append(off)
            off += m * mt
        self.plan_offsets = tuple(plan_offsets)
        self.bary_offset = off
        y1_offsets = []
        off = 0
        for mt in m_ts:
            y1_offsets.append(off)
            off += mt
        self.y1_offsets = tuple(y1_offsets)
        self.y2_offsets = tuple(self.M1 + t * (m - 1) for t in range(self.T))
        self.y3_index = self.M1 + self.M2
        # Shared block size when every distribution has the same atom
        # count; lets the kernels batch the per-block loops.
        self.uniform_mt = m_ts[0] if len(set(m_ts)) == 1 else None

    # Views into a flat primal vector.  plan_view(x, t)[j, i] is entry (i, j)
    # of the t-th plan: the column-stacked layout makes the transposed
    # (m_t, m) reshape the contiguous one.
    def plan_view(self, x, t):
        off = self.plan_offsets[t]
        return x[off:off + self.m * self.m_ts[t]].reshape(self.m_ts[t], self.m)

    def plan_matrix(self, x, t):
        return self.plan_view(x, t).T

    def bary_view(self, x):
        return x[self.bary_offset:self.bary_offset + self.m]

    # Views into a flat dual vector.
    def y1_view(self, y, t):
        off = self.y1_offsets[t]
        return y[off:off + self.m_ts[t]]

    def y2_view(self, y, t):
        off = self.y2_offsets[t]
        return y[off:off + self.m - 1]

    def __eq__(self, other):
        return (
            isinstance(other, Dims)
            and self.m == other.m
            and self.m_ts == other.m_ts
        )

    def __repr__(self):
        return f"Dims(m={self.m}, m_ts={self.m_ts})"


class PrimalVector:
    """Flat primal vector (plans then barycenter weights) with block access."""

    __slots__ = ("dims", "data")

    def __init__(self, dims, data=None):
        self.dims = dims
        if data is None:
            data = np.zeros(dims.N)
        else:
            data = np.ascontiguousarray(data, dtype=np.float64)
            if data.shape != (dims.N,):
                raise ValueError(f"expected length {dims.N}, got {data.shape}")
        self.data = data

    def plan(self, t):
        """The t-th transport plan as an (m, m_t) matrix view."""
        return self.dims.plan_matrix(self.data, t)

    def barycenter(self):
        """The barycenter weight block as a length-m view."""
        return self.dims.bary_view(self.data)

    @classmethod
    def from_blocks(cls, dims, plans, barycenter):
        v = cls(dims)
        for t, P in enumerate(plans):
            v.plan(t)[:, :] = P
        v.barycenter()[:] = barycenter
        return v


class DualVector:
    """Flat dual vector (y1 blocks; y2 blocks; y3) with block access."""

    __slots__ = ("dims", "data")

    def __init__(self, dims, data=None):
        self.dims = dims
        if data is None:
            data = np.zeros(dims.M)
        else:
            data = np.ascontiguousarray(data, dtype=np.float64)
            if data.shape != (dims.M,):
                raise ValueError(f"expected length {dims.M}, got {data.shape}")
        self.data = data

    def y1(self, t):
        return self.dims.y1_view(self.data, t)

    def y2(self, t):
        return self.dims.y2_view(self.data, t)

    @property
    def y3(self):
        return self.data[self.dims.y3_index]

    @y3.setter
    def y3(self, value):
        self.data[self.dims.y3_index] = value


def lp_data(instance):
    """Assemble the standard-form data of an instance.

    Returns
    -------
    b : ndarray, shape (M,)
        Right-hand side ``(a^1; ...; a^T; 0; ...; 0; 1)``.
    c : ndarray, shape (N,)
        Cost vector ``(vec(D^1); ...; vec(D^T); 0)``.
    dims : Dims
        Block layout shared by ``b``, ``c`` and the operator kernels.
    """
    dims = instance.dims()
    b = np.zeros(dims.M)
    for t, dist in enumerate(instance.distributions):
        dims.y1_view(b, t)[:] = dist.weights
    b[dims.y3_index] = 1.0
    c = np.zeros(dims.N)
    for t, C in enumerate(instance.cost):
        dims.plan_matrix(c, t)[:, :] = C
    return b, c, dims


def apply_A(dims, x, out=None, work=None, flops=None):
    """Apply the constraint operator: ``out = A x``.

    Per plan block the operator emits the sample-side marginal
    ``(X^t)' 1_m`` and rows ``2..m`` of the barycenter-side tie
    ``X^t 1_{m_t} - a``; the final entry is ``sum(a)``.

    Parameters
    ----------
    dims : Dims
    x : ndarray, shape (N,)
    out : ndarray, shape (M,), optional
        Result buffer; allocated when omitted.
    work : ndarray, shape (m,), optional
        Scratch for the per-plan row sums; allocated when omitted.
    flops : FlopCounter, optional
    """
    if out is None:
        out = np.empty(dims.M)
    a = dims.bary_view(x)
    mt = dims.uniform_mt
    if mt is not None and x.flags.c_contiguous and out.flags.c_contiguous:
        # All plan blocks share one shape: batch the block loop.
        T, m = dims.T, dims.m
        P3 = x[:T * mt * m].reshape(T, mt, m)
        np.sum(P3, axis=2, out=out[:T * mt].reshape(T, mt))
        Y2 = out[dims.M1:dims.M1 + T * (m - 1)].reshape(T, m - 1)
        np.sum(P3[:, :, 1:], axis=1, out=Y2)
        Y2 -= a[1:]
    else:
        if work is None:
            work = np.empty(dims.m)
        for t in range(dims.T):
            P = dims.plan_view(x, t)  # (m_t, m), P[j, i] = X^t[i, j]
            np.sum(P, axis=1, out=dims.y1_view(out, t))
            np.sum(P, axis=0, out=work)
            np.subtract(work[1:], a[1:], out=dims.y2_view(out, t))
    out[dims.y3_index] = a.sum()
    if flops is not None:
        flops.add(2 * dims.m * dims.sum_mt + dims.T * (dims.m - 1) + dims.m)
    return out


def apply_Astar(dims, y, out=None, work=None, flops=None):
    """Apply the adjoint of the constraint operator: ``out = A* y``.

    Plan block ``t`` receives ``y1^t_j + y2^t_{i-1}`` at entry ``(i, j)``
    (the ``y2`` part only for rows ``i >= 2``); the barycenter block
    receives ``y3 - sum_t y2^t_{i-1}``.
    """
    if out is None:
        out = np.empty(dims.N)
    if work is None:
        work = np.empty(dims.m - 1)
    mt = dims.uniform_mt
    if mt is not None and y.flags.c_contiguous and out.flags.c_contiguous:
        T, m = dims.T, dims.m
        Y1 = y[:T * mt].reshape(T, mt)
        Y2 = y[dims.M1:dims.M1 + T * (m - 1)].reshape(T, m - 1)
        P3 = out[:T * mt * m].reshape(T, mt, m)
        P3[:, :, :] = Y1[:, :, None]
        P3[:, :, 1:] += Y2[:, None, :]
        np.sum(Y2, axis=0, out=work)
    else:
        work[:] = 0.0
        for t in range(dims.T):
            P = dims.plan_view(out, t)
            y1 = dims.y1_view(y, t)
            y2 = dims.y2_view(y, t)
            P[:, :] = y1[:, None]
            P[:, 1:] += y2[None, :]
            work += y2
    a = dims.bary_view(out)
    a[:] = y[dims.y3_index]
    np.subtract(a[1:], work, out=a[1:])
    if flops is not None:
        flops.add(dims.sum_mt * (dims.m - 1) + (dims.T + 1) * (dims.m - 1))
    return out


def project_nonneg(x, out=None, flops=None):
    """Project onto the nonnegative orthant: ``out = max(x, 0)``."""
    out = np.maximum(x, 0.0, out=out)
    if flops is not None:
        flops.add(x.shape[0])
    return out


def primal_objective(c, x):
    """Transport objective ``<c, x>``."""
    return float(np.dot(c, x))


def dual_objective(b, y):
    """Dual objective ``<b, y>``."""
    return float(np.dot(b, y))


def kkt_terms_raw(dims, b, c, x, y, s, work_m=None, work_n=None):
    """Unnormalized Euclidean norms of the four KKT residual terms.

    Returns
    -------
    tuple of float
        ``(||b - A x||, ||min(x, 0)||, ||A* y + s - c||, ||s - max(s - x, 0)||)``.
    """
    if work_m is None:
        work_m = np.empty(dims.M)
    if work_n is None:
        work_n = np.empty(dims.N)
    apply_A(dims, x, out=work_m)
    work_m -= b
    r_primal = float(np.linalg.norm(work_m))
    np.minimum(x, 0.0, out=work_n)
    r_nonneg = float(np.linalg.norm(work_n))
    apply_Astar(dims, y, out=work_n)
    work_n += s
    work_n -= c
    r_dual = float(np.linalg.norm(work_n))
    np.subtract(s, x, out=work_n)
    np.maximum(work_n, 0.0, out=work_n)
    work_n -= s
    r_compl = float(np.linalg.norm(work_n))
    return r_primal, r_nonneg, r_dual, r_compl


class KktResidual:
    """Relative KKT residual terms of a primal-dual triple.

    Attributes
    ----------
    primal : float
        ``||b - A x|| / (1 + ||b||)``.
    nonneg : float
        ``||min(x, 0)|| / (1 + ||x||)``.
    dual : float
        ``||A* y + s - c|| / (1 + ||c|| + ||s||)``.
    compl : float
        ``||s - max(s - x, 0)|| / (1 + ||x|| + ||s||)``.
    """

    __slots__ = ("primal", "nonneg", "dual", "compl")

    def __init__(self, primal, nonneg, dual, compl):
        self.primal = primal
        self.nonneg = nonneg
        self.dual = dual
        self.compl = compl

    @property
    def max(self):
        return max(self.primal, self.nonneg, self.dual, self.compl)

    def is_finite(self):
        return all(
            np.isfinite(v) for v in (self.primal, self.nonneg, self.dual, self.compl)
        )

    def __repr__(self):
        return (
            f"KktResidual(primal={self.primal:.3e}, nonneg={self.nonneg:.3e}, "
            f"dual={self.dual:.3e}, compl={self.compl:.3e})"
        )


def kkt_residual(dims, b, c, x, y, s, work_m=None, work_n=None):
    """Relative KKT residual of ``(x, y, s)``.

    The four terms are normalized by ``1 + ||b||``, ``1 + ||x||``,
    ``1 + ||c|| + ||s||`` and ``1 + ||x|| + ||s||`` respectively; the
    denominators are recomputed from the current iterates on every call.
    """
    r_primal, r_nonneg, r_dual, r_compl = kkt_terms_raw(
        dims, b, c, x, y, s, work_m=work_m, work_n=work_n
    )
    norm_x = float(np.linalg.norm(x))
    norm_s = float(np.linalg.norm(s))
    norm_b = float(np.linalg.norm(b))
    norm_c = float(np.linalg.norm(c))
    return KktResidual(
        r_primal / (1.0 + norm_b),
        r_nonneg / (1.0 + norm_x),
        r_dual / (1.0 + norm_c + norm_s),
        r_compl / (1.0 + norm_x + norm_s),
    )
