"""First-order LP solvers for barycenter instances.

Three methods share one matrix-free engine:

* ``hpr``: anchored Peaceman-Rachford splitting on the dual LP.  Each
  iteration projects onto the nonnegative orthant, solves the operator
  normal equation in closed form, and averages toward the anchor with
  weight ``1/(k+2)``; an optional restart policy re-bases the anchor at
  checkpoints.
* ``admm``: the same subproblems driven as an alternating-direction
  method with dual step size ``gamma`` in (0, 2).
* ``hybrid``: starts on ``admm`` and hands the iterate to ``hpr`` once
  the residual or the iteration count crosses the switch thresholds.

All state lives in preallocated buffers of total size O(N); per
iteration the engine performs a constant number of vector passes plus
one linear-time normal solve, and no allocations.  Progress is measured
by the relative KKT residual, checked every ``check_every`` iterations
with freshly computed denominators.
"""

import sys
import time

import numpy as np

from .flops import FlopCounter
from .normal import NormalWorkspace, solve_wbp_normal
from .problem import (
    KktResidual,
    apply_A,
    apply_Astar,
    dual_objective,
    kkt_residual,
    lp_data,
    primal_objective,
)

__all__ = [
    "SolverOptions",
    "ConvergenceRecord",
    "SolveReport",
    "NumericFailure",
    "restart_due",
    "solve_hpr",
    "solve_admm",
    "solve_hybrid",
]


class NumericFailure(RuntimeError):
    """Raised when an iterate or residual stops being finite."""


class SolverOptions:
    """Tuning knobs shared by the LP solvers.

    Parameters
    ----------
    sigma : float
        Proximal penalty of the splitting (default 1.0).
    gamma : float
        Dual step size of the alternating-direction method, in (0, 2).
    kkt_tol : float
        Stop once the relative KKT residual falls below this.
    max_iters : int
        Iteration budget.
    check_every : int
        Residual checkpoint cadence, in iterations.
    restart : bool
        Enable the anchor restart policy (ignored by ``admm``).
    restart_window, restart_phase, restart_period : int
        Policy parameters: restart at every ``restart_window``-multiple
        checkpoint while the iteration count is at most
        ``restart_phase``; afterwards restart when the residual improved
        since the previous checkpoint or at every
        ``restart_period``-multiple.
    time_limit : float or None
        Wall-clock budget in seconds, checked at checkpoints.
    hybrid_admm_iters : int
        Hybrid rule: iterations at or below this may run ``admm``.
    hybrid_switch_tol : float
        Hybrid rule: once the residual drops below this, run ``hpr``.
    trace : bool
        Print one line per checkpoint to stderr.
    on_iteration : callable, optional
        Diagnostic hook ``f(k, x, y, s, extras)`` called after every
        iteration with read-only views of the iterates; ``extras`` holds
        ``dual_slack_norm`` (``||A* y + s - c||``) and, under ``hpr``,
        ``fixed_point_gap`` (``2 sigma ||A* y + s - c||``, the distance
        between consecutive governing-sequence points).  Copy anything
        you keep.
    record_history : bool
        Collect per-checkpoint convergence records (default True).
    """

    def __init__(self, sigma=1.0, gamma=1.9, kkt_tol=1e-5, max_iters=10000,
                 check_every=50, restart=True, restart_window=50,
                 restart_phase=500, restart_period=500, time_limit=None,
                 hybrid_admm_iters=800, hybrid_switch_tol=2e-4, trace=False,
                 on_iteration=None, record_history=True):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0.0 < gamma < 2.0:
            raise ValueError("gamma must lie in (0, 2)")
        if max_iters < 1 or check_every < 1:
            raise ValueError("max_iters and check_every must be positive")
        self.sigma = float(sigma)
        self.gamma = float(gamma)
        self.kkt_tol = float(kkt_tol)
        self.max_iters = int(max_iters)
        self.check_every = int(check_every)
        self.restart = bool(restart)
        self.restart_window = int(restart_window)
        self.restart_phase = int(restart_phase)
        self.restart_period = int(restart_period)
        self.time_limit = time_limit
        self.hybrid_admm_iters = int(hybrid_admm_iters)
        self.hybrid_switch_tol = float(hybrid_switch_tol)
        self.trace = bool(trace)
        self.on_iteration = on_iteration
        self.record_history = bool(record_history)


class ConvergenceRecord:
    """One checkpoint row of a solve."""

    __slots__ = ("iteration", "kkt", "primal_obj", "dual_obj",
                 "elapsed_secs", "restarted", "method")

    def __init__(self, iteration, kkt, primal_obj, dual_obj, elapsed_secs,
                 restarted, method):
        self.iteration = iteration
        self.kkt = kkt
        self.primal_obj = primal_obj
        self.dual_obj = dual_obj
        self.elapsed_secs = elapsed_secs
        self.restarted = restarted
        self.method = method


class SolveReport:
    """Outcome of a solve: final iterates, diagnostics and history."""

    def __init__(self, method, dims, x, y, s, iterations, termination, kkt,
                 primal_obj, dual_obj, elapsed_secs, restarts, history,
                 switch_iteration=None, sigma=None, gamma=None):
        self.method = method
        self.dims = dims
        self.x = x
        self.y = y
        self.s = s
        self.iterations = iterations
        self.termination = termination
        self.kkt = kkt
        self.primal_obj = primal_obj
        self.dual_obj = dual_obj
        self.elapsed_secs = elapsed_secs
        self.restarts = restarts
        self.history = history
        self.switch_iteration = switch_iteration
        self.sigma = sigma
        self.gamma = gamma

    @property
    def barycenter(self):
        """The solved barycenter weight vector (copy)."""
        return self.dims.bary_view(self.x).copy()

    def plan(self, t):
        """The t-th transport plan (copy), shape (m, m_t)."""
        return self.dims.plan_matrix(self.x, t).copy()

    def __repr__(self):
        return (
            f"SolveReport(method={self.method!r}, iterations={self.iterations}, "
            f"termination={self.termination!r}, kkt_max={self.kkt.max:.3e})"
        )


def restart_due(k, kkt_now, kkt_prev, window=50, phase=500, period=500):
    """Anchor restart decision at checkpoint ``k``.

    While ``k <= phase`` the anchor restarts at every
    ``window``-multiple; past the phase boundary it restarts when the
    residual improved since the previous checkpoint (``kkt_prev >
    kkt_now``) or unconditionally at every ``period``-multiple.
    """
    if k <= phase:
        return k % window == 0
    if kkt_prev is not None and kkt_prev > kkt_now:
        return True
    return k % period == 0


class _Engine:
    """Preallocated iteration state for one instance."""

    def __init__(self, instance, options):
        self.opts = options
        self.b, self.c, self.dims = lp_data(instance)
        dims = self.dims
        N, M = dims.N, dims.M
        self.x = np.zeros(N)
        self.xhat = np.zeros(N)
        self.xhat0 = np.zeros(N)
        self.x_half = np.empty(N)
        self.s = np.empty(N)
        self.u = np.empty(N)      # c - A* y for the current y
        self.u0 = np.empty(N)     # c - A* y at the anchor
        self.d = np.empty(N)
        self.tmp_n = np.empty(N)
        self.y = np.zeros(M)
        self.rhs = np.empty(M)
        self.work_m = np.empty(M)
        self.row_work = np.empty(dims.m)
        self.col_work = np.empty(dims.m - 1)
        self.normal_work = NormalWorkspace(dims)
        self.flops = None

        # y = 0 initially, so u = c - A*y = c.
        self.u[:] = self.c
        self.u0[:] = self.c
        self.s[:] = self.u  # s^0 = c - A* y^0
        self.kh = 0

    # -- single iterations ------------------------------------------------

    def _solve_normal_into_y(self):
        fl = self.flops
        apply_A(self.dims, self.tmp_n, out=self.work_m, work=self.row_work,
                flops=fl)
        np.multiply(self.b, 1.0 / self.opts.sigma, out=self.rhs)
        self.rhs -= self.work_m
        solve_wbp_normal(self.dims, self.rhs, out=self.y,
                         work=self.normal_work, flops=fl)
        apply_Astar(self.dims, self.y, out=self.u, work=self.col_work,
                    flops=fl)
        np.subtract(self.c, self.u, out=self.u)
        if fl is not None:
            fl.add(2 * self.dims.M + self.dims.N)

    def hpr_iteration(self):
        """One anchored splitting step; returns ||A* y_new + s - c||."""
        o = self.opts
        sigma = o.sigma
        inv_sigma = 1.0 / sigma
        fl = self.flops
        # s = max(0, c - A*y - xhat/sigma), with u = c - A*y cached.
        np.multiply(self.xhat, -inv_sigma, out=self.s)
        self.s += self.u
        np.maximum(self.s, 0.0, out=self.s)
        # x_half = xhat + sigma*(s + A*y - c) = xhat + sigma*(s - u).
        np.subtract(self.s, self.u, out=self.d)
        np.multiply(self.d, sigma, out=self.x_half)
        self.x_half += self.xhat
        # Normal solve at x_half/sigma + s - c; refreshes u = c - A*y.
        np.multiply(self.x_half, inv_sigma, out=self.tmp_n)
        self.tmp_n += self.s
        self.tmp_n -= self.c
        self._solve_normal_into_y()
        # x = x_half + sigma*(s + A*y_new - c).
        np.subtract(self.s, self.u, out=self.x)
        slack = float(np.linalg.norm(self.x))
        self.x *= sigma
        self.x += self.x_half
        # xhat = lam*xhat0 + (1-lam)*x + sigma*lam*(u - u0).
        lam = 1.0 / (self.kh + 2.0)
        np.subtract(self.u, self.u0, out=self.tmp_n)
        self.tmp_n *= sigma * lam
        np.multiply(self.x, 1.0 - lam, out=self.xhat)
        self.xhat += self.tmp_n
        np.multiply(self.xhat0, lam, out=self.tmp_n)
        self.xhat += self.tmp_n
        self.kh += 1
        if fl is not None:
            fl.add(21 * self.dims.N + 2)
        return slack

    def admm_iteration(self):
        """One alternating-direction step; returns ||A* y_new + s - c||."""
        o = self.opts
        sigma = o.sigma
        inv_sigma = 1.0 / sigma
        fl = self.flops
        # s = max(0, c - A*y - x/sigma).
        np.multiply(self.x, -inv_sigma, out=self.s)
        self.s += self.u
        np.maximum(self.s, 0.0, out=self.s)
        # Normal solve at x/sigma + s - c; refreshes u = c - A*y.
        np.multiply(self.x, inv_sigma, out=self.tmp_n)
        self.tmp_n += self.s
        self.tmp_n -= self.c
        self._solve_normal_into_y()
        # x += gamma*sigma*(s + A*y_new - c).
        np.subtract(self.s, self.u, out=self.tmp_n)
        slack = float(np.linalg.norm(self.tmp_n))
        self.tmp_n *= o.gamma * sigma
        self.x += self.tmp_n
        if fl is not None:
            fl.add(13 * self.dims.N + 2)
        return slack

    # -- anchor management -------------------------------------------------

    def rebase_anchor(self):
        """Re-anchor at the current (xhat, y); resets the anchor index."""
        self.xhat0[:] = self.xhat
        self.u0[:] = self.u
        self.kh = 0

    def enter_hpr_from_admm(self):
        """Hand the multiplier iterate to the anchored method."""
        self.xhat[:] = self.x
        self.xhat0[:] = self.x
        self.u0[:] = self.u
        self.kh = 0

    # -- diagnostics --------------------------------------------------------

    def residual(self):
        return kkt_residual(self.dims, self.b, self.c, self.x, self.y,
                            self.s, work_m=self.work_m, work_n=self.tmp_n)

    def objectives(self):
        return (primal_objective(self.c, self.x),
                dual_objective(self.b, self.y))


def _run(instance, options, mode):
    eng = _Engine(instance, options)
    o = options
    start = time.perf_counter()
    history = []
    restarts = 0
    switch_iteration = None
    hybrid = mode == "hybrid"
    # The hybrid starts on admm; plain modes never switch.
    current = "admm" if mode in ("admm", "hybrid") else "hpr"

    def record(k, res, restarted):
        p_obj, d_obj = eng.objectives()
        if not res.is_finite() or not np.isfinite(p_obj):
            raise NumericFailure(
                f"non-finite iterate at iteration {k} (method {current})"
            )
        if o.record_history:
            history.append(ConvergenceRecord(
                k, res, p_obj, d_obj, time.perf_counter() - start,
                restarted, current,
            ))
        if o.trace:
            print(
                f"[{mode}] iter {k:6d} kkt {res.max:.3e} obj {p_obj:.8e} "
                f"{'restart' if restarted else ''}",
                file=sys.stderr,
            )

    res = eng.residual()
    record(0, res, False)
    if res.max <= o.kkt_tol:
        p_obj, d_obj = eng.objectives()
        return SolveReport(mode, eng.dims, eng.x, eng.y, eng.s, 0,
                           "tolerance", res, p_obj, d_obj,
                           time.perf_counter() - start, 0, history,
                           None, o.sigma, o.gamma)

    kkt_prev = None
    termination = "max_iters"
    k = 0
    while k < o.max_iters:
        k += 1
        if current == "hpr":
            slack = eng.hpr_iteration()
        else:
            slack = eng.admm_iteration()
        if o.on_iteration is not None:
            extras = {"dual_slack_norm": slack}
            if current == "hpr":
                extras["fixed_point_gap"] = 2.0 * o.sigma * slack
            o.on_iteration(k, eng.x, eng.y, eng.s, extras)
        if k % o.check_every != 0 and k < o.max_iters:
            continue

        res = eng.residual()
        if res.max <= o.kkt_tol:
            record(k, res, False)
            termination = "tolerance"
            break
        if o.time_limit is not None and time.perf_counter() - start > o.time_limit:
            record(k, res, False)
            termination = "time_limit"
            break
        if k >= o.max_iters:
            record(k, res, False)
            termination = "max_iters"
            break

        # Restart applies to the method that produced this iterate; a
        # hybrid switch below re-anchors on its own.
        switching = False
        if hybrid:
            want = "admm" if (k <= o.hybrid_admm_iters
                              and res.max >= o.hybrid_switch_tol) else "hpr"
            switching = want != current
        restarted = False
        if current == "hpr" and o.restart and not switching:
            if restart_due(k, res.max, kkt_prev, o.restart_window,
                           o.restart_phase, o.restart_period):
                eng.rebase_anchor()
                restarts += 1
                restarted = True
        record(k, res, restarted)
        if switching:
            if want == "hpr":
                eng.enter_hpr_from_admm()
                if switch_iteration is None:
                    switch_iteration = k
            current = want
        kkt_prev = res.max

    p_obj, d_obj = eng.objectives()
    return SolveReport(mode, eng.dims, eng.x, eng.y, eng.s, k, termination,
                       res, p_obj, d_obj, time.perf_counter() - start,
                       restarts, history, switch_iteration, o.sigma, o.gamma)


def solve_hpr(instance, options=None):
    """Solve a barycenter instance with the anchored splitting method.

    Parameters
    ----------
    instance : WbpInstance
    options : SolverOptions, optional

    Returns
    -------
    SolveReport
    """
    return _run(instance, options or SolverOptions(), "hpr")


def solve_admm(instance, options=None):
    """Solve a barycenter instance with the alternating-direction method."""
    return _run(instance, options or SolverOptions(), "admm")


def solve_hybrid(instance, options=None):
    """Alternating-direction warm start handed over to the anchored method.

    Runs ``admm`` while the iteration count is at most
    ``hybrid_admm_iters`` and the residual is at least
    ``hybrid_switch_tol``, then continues with ``hpr`` from the current
    iterate.  The switch iteration is recorded on the report.
    """
    return _run(instance, options or SolverOptions(), "hybrid")
