"""Halpern-anchored Peaceman-Rachford splitting for two-block problems.

The target is the linearly constrained problem

    min f1(y) + f2(s)   s.t.   B1 y + B2 s = c,

iterated through the reflected resolvents of the two monotone blocks of
its dual inclusion, with the plain Peaceman-Rachford update replaced by
the anchored average

    eta^{k+1} = (1/(k+2)) eta^0 + ((k+1)/(k+2)) v^{k+1},

which restores convergence and gives the O(1/k) fixed-point residual
rate.  Three algebraically equivalent formulations are provided:

* :func:`inclusion_step` works on the governing operator directly
  (state ``eta``), one resolvent per block.
* :func:`optform_step` carries ``eta`` but evaluates the resolvents
  through the two prox-style subproblems of the optimization form.
* :func:`lean_step` keeps only ``(y, xhat)`` plus two anchor vectors,
  which is the memory footprint used by the production solvers; its
  ``eta`` is recoverable as ``xhat + sigma*(B1 y - c)``.

:func:`verify_equivalence` runs the three in lockstep and reports the
largest pairwise deviation, which should sit at rounding level.

The module is deliberately allocation-happy and small-scale; the tuned
barycenter loops live in :mod:`barylp.solvers`.
"""

import numpy as np

__all__ = [
    "halpern_weight",
    "TwoBlockProblem",
    "make_dual_lp_problem",
    "inclusion_step",
    "optform_step",
    "lean_step",
    "verify_equivalence",
]


def halpern_weight(k):
    """Anchor weight ``lambda_k = 1/(k+2)`` of iteration ``k``."""
    return 1.0 / (k + 2.0)


class TwoBlockProblem:
    """Callable bundle describing one two-block instance.

    Parameters
    ----------
    c : ndarray
        Right-hand side of the coupling constraint ``B1 y + B2 s = c``.
    apply_B1, apply_B2 : callable
        The two constraint maps into the ``c`` space.
    apply_B1T, apply_B2T : callable
        Their adjoints.
    solve_y : callable ``(q, sigma) -> y``
        Minimizer of ``f1(y) + <q, B1 y - c> + (sigma/2)||B1 y - c||^2``.
    solve_s : callable ``(q, sigma) -> s``
        Minimizer of ``f2(s) + <q, B2 s> + (sigma/2)||B2 s||^2``.
    y_size, s_size : int
        Block dimensions (for default zero initial points).
    """

    def __init__(self, c, apply_B1, apply_B1T, apply_B2, apply_B2T,
                 solve_y, solve_s, y_size, s_size):
        self.c = np.asarray(c, dtype=np.float64)
        self.apply_B1 = apply_B1
        self.apply_B1T = apply_B1T
        self.apply_B2 = apply_B2
        self.apply_B2T = apply_B2T
        self.solve_y = solve_y
        self.solve_s = solve_s
        self.y_size = y_size
        self.s_size = s_size

    @property
    def x_size(self):
        return self.c.shape[0]


def make_dual_lp_problem(b, c, apply_A_fn, apply_Astar_fn, solve_normal_fn):
    """Two-block form of the standard LP ``min <c,x>, Ax = b, x >= 0``.

    The splitting runs on the dual: ``f1(y) = -<b, y>`` with ``B1 = A*``,
    and ``f2 = indicator of the nonnegative orthant`` with ``B2 = I``.
    The y-subproblem reduces to the operator normal equation

        A A* y = b/sigma - A(q/sigma - c),

    solved exactly by ``solve_normal_fn``; the s-subproblem is the
    closed-form projection ``max(-q/sigma, 0)``.
    """
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)

    def solve_y(q, sigma):
        rhs = b / sigma - apply_A_fn(q / sigma - c)
        return solve_normal_fn(rhs)

    def solve_s(q, sigma):
        return np.maximum(-q / sigma, 0.0)

    return TwoBlockProblem(
        c=c,
        apply_B1=apply_Astar_fn,
        apply_B1T=apply_A_fn,
        apply_B2=lambda s: s,
        apply_B2T=lambda x: x,
        solve_y=solve_y,
        solve_s=solve_s,
        y_size=b.shape[0],
        s_size=c.shape[0],
    )


# The resolvent of the s-block operator at eta is eta + sigma*B2 s with s
# from the s-subproblem; the resolvent of the y-block operator at xi is
# xi + sigma*(B1 y - c) with y from the y-subproblem.

def _resolvent_s(prob, sigma, eta):
    s = prob.solve_s(eta, sigma)
    return eta + sigma * prob.apply_B2(s), s


def _resolvent_y(prob, sigma, xi):
    y = prob.solve_y(xi, sigma)
    return xi + sigma * (prob.apply_B1(y) - prob.c), y


def inclusion_step(prob, sigma, eta, eta0, k):
    """One anchored step on the inclusion form.

    Returns ``(eta_next, info)`` where ``info`` carries the intermediate
    ``w, x, v`` vectors and the subproblem solutions ``s, y``.
    """
    w, s = _resolvent_s(prob, sigma, eta)
    reflected = 2.0 * w - eta
    x, y = _resolvent_y(prob, sigma, reflected)
    v = 2.0 * x - reflected
    lam = halpern_weight(k)
    eta_next = lam * eta0 + (1.0 - lam) * v
    return eta_next, {"w": w, "x": x, "v": v, "s": s, "y": y}


def optform_step(prob, sigma, eta, eta0, k):
    """One anchored step on the optimization form (state ``eta``).

    Identical trajectory to :func:`inclusion_step`; spelled through the
    two subproblems so every intermediate has an optimization meaning.
    """
    s = prob.solve_s(eta, sigma)
    B2s = prob.apply_B2(s)
    w = eta + sigma * B2s
    y = prob.solve_y(eta + 2.0 * sigma * B2s, sigma)
    B1y_c = prob.apply_B1(y) - prob.c
    x = eta + sigma * B1y_c + 2.0 * sigma * B2s
    v = eta + 2.0 * sigma * (B1y_c + B2s)
    lam = halpern_weight(k)
    eta_next = lam * eta0 + (1.0 - lam) * v
    return eta_next, {"w": w, "x": x, "v": v, "s": s, "y": y}


def lean_step(prob, sigma, y, xhat, anchors, k):
    """One anchored step carrying only ``(y, xhat)``.

    ``anchors`` is the pair ``(xhat0, B1y0_c)`` fixed at the anchor point,
    where ``B1y0_c = B1 y^0 - c``.  Returns ``(y_next, xhat_next, info)``.
    """
    xhat0, B1y0_c = anchors
    B1y_c = prob.apply_B1(y) - prob.c
    s = prob.solve_s(xhat + sigma * B1y_c, sigma)
    B2s = prob.apply_B2(s)
    x_half = xhat + sigma * (B1y_c + B2s)
    y_next = prob.solve_y(x_half + sigma * B2s, sigma)
    B1y_next_c = prob.apply_B1(y_next) - prob.c
    x_next = x_half + sigma * (B1y_next_c + B2s)
    lam = halpern_weight(k)
    xhat_next = lam * xhat0 + (1.0 - lam) * x_next + sigma * lam * (B1y0_c - B1y_next_c)
    return y_next, xhat_next, {"s": s, "x": x_next, "x_half": x_half,
                               "B1y_c": B1y_next_c}


def verify_equivalence(prob, sigma, n_iters, y0=None, x0=None):
    """Run the three formulations in lockstep and measure their spread.

    All three start from the same ``(y0, x0)`` (zeros by default, giving
    ``eta^0 = x^0 + sigma*(B1 y^0 - c)``).  Per iteration the compared
    quantities are the ``w, x, v, eta`` vectors of the two eta-forms, the
    ``s, y, x`` blocks of the eta-form versus the lean form, and the
    lean form's reconstructed ``eta``.

    Returns
    -------
    float
        The largest infinity-norm deviation observed over all iterations
        and compared quantities; rounding-level for exact arithmetic
        subproblem solvers.
    """
    if y0 is None:
        y0 = np.zeros(prob.y_size)
    if x0 is None:
        x0 = np.zeros(prob.x_size)
    B1y0_c = prob.apply_B1(y0) - prob.c
    eta0 = x0 + sigma * B1y0_c
    eta_a = eta0.copy()
    eta_b = eta0.copy()
    y_c = np.asarray(y0, dtype=np.float64).copy()
    xhat_c = np.asarray(x0, dtype=np.float64).copy()
    anchors = (xhat_c.copy(), B1y0_c.copy())

    def dev(u, v):
        return float(np.max(np.abs(u - v))) if u.size else 0.0

    worst = 0.0
    for k in range(n_iters):
        eta_a, info_a = inclusion_step(prob, sigma, eta_a, eta0, k)
        eta_b, info_b = optform_step(prob, sigma, eta_b, eta0, k)
        y_c, xhat_c, info_c = lean_step(prob, sigma, y_c, xhat_c, anchors, k)
        for key in ("w", "x", "v", "s", "y"):
            worst = max(worst, dev(info_a[key], info_b[key]))
        worst = max(worst, dev(info_b["s"], info_c["s"]))
        worst = max(worst, dev(info_b["x"], info_c["x"]))
        worst = max(worst, dev(info_b["y"], y_c))
        eta_c = xhat_c + sigma * info_c["B1y_c"]
        worst = max(worst, dev(eta_b, eta_c))
        worst = max(worst, dev(eta_a, eta_b))
    return worst
