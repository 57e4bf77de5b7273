"""Entropic-regularization baseline via iterative Bregman projections.

The regularized barycenter problem is solved by alternating scaling
projections of the kernels ``K^t = exp(-C^t / epsilon)``, where ``C^t``
are the unweighted ground costs.  Plans are represented as
``diag(u^t) K^t diag(v^t)`` with the barycenter side on the rows.  Each
sweep projects onto the sample marginals (``v`` update), takes the
weighted geometric mean of the row marginals as the new barycenter
weights, and re-projects the rows onto them (``u`` update).

At small ``epsilon`` the kernels underflow in plain scaling form; the
``log_domain`` option then runs the identical recursion on the dual
potentials with log-sum-exp reductions.

This baseline terminates on the L1 change of the barycenter weights,
not on LP optimality; its solutions carry the entropic bias and are
meant as a speed/quality reference for the LP solvers.
"""

import time

import numpy as np

from .problem import PrimalVector

__all__ = ["IbpOptions", "IbpRecord", "IbpReport", "solve_ibp"]


class IbpOptions:
    """Options for the scaling baseline.

    Parameters
    ----------
    epsilon : float
        Entropic regularization strength (relative to ground costs whose
        largest entry is around one).
    tol : float
        Stop when the L1 change of the barycenter weights between
        consecutive sweeps falls below this.
    max_iters : int
        Sweep budget.
    check_every : int
        History record cadence, in sweeps.
    log_domain : bool
        Run on log potentials with log-sum-exp reductions; required for
        small ``epsilon`` where ``exp(-C/epsilon)`` underflows.
    time_limit : float or None
        Wall-clock budget in seconds.
    """

    def __init__(self, epsilon=0.01, tol=1e-6, max_iters=10000,
                 check_every=50, log_domain=False, time_limit=None):
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.epsilon = float(epsilon)
        self.tol = float(tol)
        self.max_iters = int(max_iters)
        self.check_every = int(check_every)
        self.log_domain = bool(log_domain)
        self.time_limit = time_limit


class IbpRecord:
    """One history row of a scaling run."""

    __slots__ = ("iteration", "marginal_error", "weight_change",
                 "primal_obj", "elapsed_secs")

    def __init__(self, iteration, marginal_error, weight_change, primal_obj,
                 elapsed_secs):
        self.iteration = iteration
        self.marginal_error = marginal_error
        self.weight_change = weight_change
        self.primal_obj = primal_obj
        self.elapsed_secs = elapsed_secs


class IbpReport:
    """Outcome of a scaling run."""

    def __init__(self, barycenter, plans, iterations, termination,
                 marginal_error, weight_change, primal_obj, elapsed_secs,
                 history, epsilon, log_domain):
        self.barycenter = barycenter
        self.plans = plans
        self.iterations = iterations
        self.termination = termination
        self.marginal_error = marginal_error
        self.weight_change = weight_change
        self.primal_obj = primal_obj
        self.elapsed_secs = elapsed_secs
        self.history = history
        self.epsilon = epsilon
        self.log_domain = log_domain
        self.method = "ibp"

    def primal_vector(self, dims):
        """Pack the plans and weights into a flat LP primal vector."""
        return PrimalVector.from_blocks(dims, self.plans, self.barycenter)

    def __repr__(self):
        return (
            f"IbpReport(epsilon={self.epsilon}, iterations={self.iterations}, "
            f"termination={self.termination!r})"
        )


def _logsumexp(Z, axis):
    top = np.max(Z, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(Z - top), axis=axis, keepdims=True)) + top
    return np.squeeze(out, axis=axis)


def _underflow(name):
    raise FloatingPointError(
        f"scaling kernel underflow in {name}; epsilon is too small for "
        "plain scaling, rerun with log_domain=True"
    )


def solve_ibp(instance, options=None):
    """Approximate a barycenter instance by entropic scaling sweeps.

    The ground costs are recovered from the instance as
    ``C^t = cost[t] / omega_t``; the reported objective is the LP
    objective ``sum_t <cost[t], plan^t>``, directly comparable with the
    LP solvers' objective.

    Returns
    -------
    IbpReport
        Barycenter weights, plans, termination data and history.  The
        ``marginal_error`` is the largest L1 mismatch between a plan's
        sample-side marginal and its target after the final sweep.

    Raises
    ------
    FloatingPointError
        On kernel underflow in plain scaling mode (suggests
        ``log_domain=True``).
    """
    if options is None:
        options = IbpOptions()
    eps = options.epsilon
    T = instance.T
    m = instance.m
    omega = instance.omega
    targets = [d.weights for d in instance.distributions]
    start = time.perf_counter()

    costs = [instance.cost[t] / omega[t] for t in range(T)]
    if options.log_domain:
        state = _LogState(costs, eps)
    else:
        state = _ScalingState(costs, eps)

    a = np.full(m, 1.0 / m)
    history = []
    termination = "max_iters"
    weight_change = np.inf
    k = 0

    def snapshot(k, weight_change, record=True):
        plans = state.plans()
        marg = max(
            float(np.abs(P.sum(axis=0) - tgt).sum())
            for P, tgt in zip(plans, targets)
        )
        obj = sum(float(np.sum(C * P)) for C, P in zip(instance.cost, plans))
        if record:
            history.append(IbpRecord(k, marg, weight_change, obj,
                                     time.perf_counter() - start))
        return plans, marg, obj

    snapshot(0, weight_change)
    for k in range(1, options.max_iters + 1):
        a_next = state.sweep(targets, omega)
        weight_change = float(np.abs(a_next - a).sum())
        a = a_next
        if k % options.check_every == 0:
            snapshot(k, weight_change)
        if weight_change < options.tol:
            termination = "tolerance"
            break
        if (options.time_limit is not None
                and time.perf_counter() - start > options.time_limit):
            termination = "time_limit"
            break

    already = bool(history) and history[-1].iteration == k
    plans, marg, obj = snapshot(k, weight_change, record=not already)
    return IbpReport(a, plans, k, termination, marg, weight_change, obj,
                     time.perf_counter() - start, history, eps,
                     options.log_domain)


class _ScalingState:
    """Plain scaling sweep on kernels K^t = exp(-C^t/eps)."""

    def __init__(self, costs, eps):
        self.kernels = [np.exp(-C / eps) for C in costs]
        self.u = [np.ones(K.shape[0]) for K in self.kernels]
        self.v = [np.ones(K.shape[1]) for K in self.kernels]

    def sweep(self, targets, omega):
        # Sample-side projection, then geometric mean of row marginals,
        # then barycenter-side projection.
        Kv = []
        log_a = 0.0
        for t, K in enumerate(self.kernels):
            Ktu = K.T @ self.u[t]
            if not np.all(Ktu > 0.0) or not np.all(np.isfinite(Ktu)):
                _underflow("K'u")
            self.v[t] = targets[t] / Ktu
            kv = K @ self.v[t]
            if not np.all(kv > 0.0) or not np.all(np.isfinite(kv)):
                _underflow("Kv")
            Kv.append(kv)
            log_a = log_a + omega[t] * np.log(self.u[t] * kv)
        a = np.exp(log_a)
        for t in range(len(self.kernels)):
            self.u[t] = a / Kv[t]
        return a

    def plans(self):
        return [
            (self.u[t][:, None] * K) * self.v[t][None, :]
            for t, K in enumerate(self.kernels)
        ]


class _LogState:
    """The same sweep on log potentials with log-sum-exp reductions."""

    def __init__(self, costs, eps):
        self.eps = eps
        self.neg_cost = [-C / eps for C in costs]
        self.f = [np.zeros(C.shape[0]) for C in costs]
        self.g = [np.zeros(C.shape[1]) for C in costs]
        self.log_targets = None

    def sweep(self, targets, omega):
        if self.log_targets is None:
            self.log_targets = [np.log(t) for t in targets]
        log_a = 0.0
        row_lse = []
        for t, Z in enumerate(self.neg_cost):
            # g so that the column sums of exp(f + g + Z) hit the target.
            self.g[t] = self.log_targets[t] - _logsumexp(
                Z + self.f[t][:, None], axis=0
            )
            lse = _logsumexp(Z + self.g[t][None, :], axis=1)
            row_lse.append(lse)
            log_a = log_a + omega[t] * (self.f[t] + lse)
        for t in range(len(self.neg_cost)):
            self.f[t] = log_a - row_lse[t]
        return np.exp(log_a)

    def plans(self):
        return [
            np.exp(Z + self.f[t][:, None] + self.g[t][None, :])
            for t, Z in enumerate(self.neg_cost)
        ]
