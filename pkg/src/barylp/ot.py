"""Single optimal transport problems in the same standard LP form.

A transport problem between distributions ``u`` (size m_u) and ``v``
(size m_v) uses the plan ``X`` of shape ``(m_u, m_v)``, column-stacked
into ``x = vec(X)``.  The constraint operator stacks the full
``v``-side marginal with rows ``2..m_u`` of the ``u``-side marginal
(the first row is redundant and dropped to keep full row rank):

    A x = ( X' 1_{m_u} ; [X 1_{m_v}]_{2..m_u} ),
    b   = ( a_v ; [a_u]_{2..m_u} ).

The dual variable is ``y = (y1; y2)`` with ``y1`` of length ``m_v`` and
``y2`` of length ``m_u - 1``.  ``m_u >= 2`` is required.
"""

import numpy as np

from .problem import DiscreteDistribution

__all__ = [
    "OtProblem",
    "ot_lp_data",
    "apply_ot_A",
    "apply_ot_Astar",
]


class OtProblem:
    """An optimal transport LP between two discrete distributions.

    Parameters
    ----------
    source : DiscreteDistribution
        Distribution on the plan's row side (size ``m_u >= 2``).
    target : DiscreteDistribution
        Distribution on the plan's column side (size ``m_v``).
    cost : ndarray, shape (m_u, m_v)
        Ground cost matrix.
    """

    def __init__(self, source, target, cost):
        cost = np.ascontiguousarray(cost, dtype=np.float64)
        if not isinstance(source, DiscreteDistribution):
            source = DiscreteDistribution(*source)
        if not isinstance(target, DiscreteDistribution):
            target = DiscreteDistribution(*target)
        if source.size < 2:
            raise ValueError("source needs at least 2 atoms")
        if cost.shape != (source.size, target.size):
            raise ValueError(
                f"cost has shape {cost.shape}, expected {(source.size, target.size)}"
            )
        self.source = source
        self.target = target
        self.cost = cost

    @property
    def m_u(self):
        return self.source.size

    @property
    def m_v(self):
        return self.target.size

    def __repr__(self):
        return f"OtProblem(m_u={self.m_u}, m_v={self.m_v})"


def ot_lp_data(problem):
    """Standard-form data ``(b, c)`` of a transport problem."""
    b = np.concatenate([problem.target.weights, problem.source.weights[1:]])
    c = problem.cost.flatten(order="F")
    return b, c


def apply_ot_A(m_u, m_v, x, out=None, flops=None):
    """Apply the transport constraint operator to ``x = vec(X)``."""
    if out is None:
        out = np.empty(m_v + m_u - 1)
    P = x.reshape(m_v, m_u)  # P[j, i] = X[i, j]
    np.sum(P, axis=1, out=out[:m_v])
    np.sum(P[:, 1:], axis=0, out=out[m_v:])
    if flops is not None:
        flops.add(2 * m_u * m_v)
    return out


def apply_ot_Astar(m_u, m_v, y, out=None, flops=None):
    """Apply the adjoint of the transport constraint operator."""
    if out is None:
        out = np.empty(m_u * m_v)
    P = out.reshape(m_v, m_u)
    P[:, :] = y[:m_v, None]
    P[:, 1:] += y[m_v:][None, :]
    if flops is not None:
        flops.add(m_v * (m_u - 1))
    return out
