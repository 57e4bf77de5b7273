"""Acceptance gate: one test per shipped guarantee, run at the stated
tolerances and runtime budgets.  Each test prints a single PASS/FAIL line
with the measured quantities so a log scan shows the whole gate at a
glance."""

import time

import numpy as np

import barylp
from barylp.datagen import SyntheticConfig, generate_synthetic
from barylp.flops import FlopCounter
from barylp.ibp import IbpOptions, solve_ibp
from barylp.datagen import build_cost
from barylp.normal import NormalWorkspace, solve_ot_normal, solve_wbp_normal
from barylp.problem import (Dims, DiscreteDistribution, WbpInstance,
                            kkt_terms_raw, lp_data)
from barylp.solvers import (SolverOptions, _Engine, solve_admm, solve_hpr,
                            solve_hybrid)

from oracles import (dense_ot_A, dense_wbp_A, quality_instance, random_dims,
                     self_barycenter_instance)


def _report(num, name, ok, detail):
    print(f"[acceptance {num:02d}] {name}: {'PASS' if ok else 'FAIL'} "
          f"({detail})")
    return ok


def test_01_wbp_normal_matches_dense_gram():
    rng = np.random.default_rng(1001)
    tol_fail = 0
    worst = 0.0
    n_cases = 1000
    start = time.perf_counter()
    for _ in range(n_cases):
        dims = random_dims(rng, max_T=5, max_m=8, max_mt=8)
        A = dense_wbp_A(dims.m, dims.m_ts)
        G = A @ A.T
        R = rng.standard_normal(dims.M)
        y = solve_wbp_normal(dims, R)
        err = float(np.linalg.norm(G @ y - R))
        bound = 1e-10 * (1.0 + float(np.linalg.norm(R)))
        worst = max(worst, err / bound)
        tol_fail += err > bound
    elapsed = time.perf_counter() - start
    ok = tol_fail == 0 and elapsed < 5.0
    assert _report(1, "barycenter normal solve vs dense gram", ok,
                   f"{n_cases} cases, worst err/bound {worst:.3f}, "
                   f"{elapsed:.2f}s")


def test_02_ot_normal_matches_dense_gram():
    rng = np.random.default_rng(1002)
    tol_fail = 0
    worst = 0.0
    n_cases = 1000
    start = time.perf_counter()
    for _ in range(n_cases):
        m_u = int(rng.integers(2, 13))
        m_v = int(rng.integers(1, 13))
        A = dense_ot_A(m_u, m_v)
        G = A @ A.T
        R = rng.standard_normal(m_v + m_u - 1)
        y = solve_ot_normal(m_u, m_v, R)
        err = float(np.linalg.norm(G @ y - R))
        bound = 1e-10 * (1.0 + float(np.linalg.norm(R)))
        worst = max(worst, err / bound)
        tol_fail += err > bound
    elapsed = time.perf_counter() - start
    ok = tol_fail == 0 and elapsed < 5.0
    assert _report(2, "transport normal solve vs dense gram", ok,
                   f"{n_cases} cases, worst err/bound {worst:.3f}, "
                   f"{elapsed:.2f}s")


def _instance_for(rng, m, m_ts):
    # Direct construction: the synthetic generator needs enough pooled
    # atoms to seed its clustering, which tiny shapes lack.
    dists = []
    for mt in m_ts:
        w = rng.random(mt) + 0.1
        dists.append(DiscreteDistribution(w / w.sum(),
                                          rng.standard_normal((mt, 2))))
    omega = rng.random(len(m_ts)) + 0.1
    omega /= omega.sum()
    support = rng.standard_normal((m, 2))
    ground = build_cost(support, [d.support for d in dists])
    cost = [omega[t] * ground[t] for t in range(len(m_ts))]
    return WbpInstance(dists, omega, cost, bary_support=support)


def test_03_flop_budgets():
    rng = np.random.default_rng(1003)
    cases = [
        (2, (1,)), (2, (1, 1)), (6, (4, 5, 6)), (8, (8,) * 5),
        (20, (20,) * 10), (5, (1, 7)), (12, (3, 9, 6, 12)),
    ]
    ok = True
    details = []
    for m, m_ts in cases:
        dims = Dims(m, m_ts)
        T, sum_mt = dims.T, dims.sum_mt
        fl = FlopCounter()
        solve_wbp_normal(dims, rng.standard_normal(dims.M), flops=fl)
        normal_budget = 7 * T * m + 3 * sum_mt + 64 * T
        normal_ok = fl.count <= normal_budget
        eng = _Engine(_instance_for(rng, m, m_ts), SolverOptions())
        eng.flops = FlopCounter()
        eng.hpr_iteration()
        iter_budget = 26 * m * sum_mt + 64 * (T * m + sum_mt)
        iter_ok = eng.flops.count <= iter_budget
        ok = ok and normal_ok and iter_ok
        details.append(f"m={m},T={T}: normal {fl.count}/{normal_budget}, "
                       f"iter {eng.flops.count}/{iter_budget}")
    assert _report(3, "flop budgets", ok, "; ".join(details))


def test_04_splitting_forms_agree(tiny):
    b, c, dims = barylp.lp_data(tiny)
    ws = NormalWorkspace(dims)
    prob = barylp.make_dual_lp_problem(
        b, c,
        lambda v: barylp.apply_A(dims, v),
        lambda w: barylp.apply_Astar(dims, w),
        lambda rhs: solve_wbp_normal(dims, rhs, work=ws),
    )
    worst = barylp.verify_equivalence(prob, sigma=1.0, n_iters=200)
    ok = worst <= 1e-9
    assert _report(4, "three splitting forms in lockstep", ok,
                   f"200 iterations, max deviation {worst:.3e}")


def test_05_anchored_rate_bound(tiny, tiny_reference):
    sigma = float(tiny_reference["sigma"])
    eta0 = tiny_reference["eta0"]
    rhs = 2.0 * float(np.linalg.norm(eta0 - tiny_reference["eta_star"]))
    rhs *= 1.0 + 1e-6
    eng = _Engine(tiny, SolverOptions(sigma=sigma, restart=False))
    worst = 0.0
    # Iteration j computes the governing-sequence step with anchor index
    # j-1, so the factor (k+1) for k <= 5000 runs j over 1..5001.
    for j in range(1, 5002):
        gap = 2.0 * sigma * eng.hpr_iteration()
        worst = max(worst, j * gap)
    ok = worst <= rhs
    assert _report(5, "anchored fixed-point rate bound", ok,
                   f"sup (k+1)*gap = {worst:.4f} vs bound {rhs:.4f}")


def test_06_kkt_rate_bound(tiny, tiny_reference):
    sigma = float(tiny_reference["sigma"])
    b, c, dims = lp_data(tiny)
    # x^0 = 0 and s^0 = c; (x*, s*) is the limit of the reference run's
    # own primal/slack sequences.
    const = (1.0 + sigma) / sigma * (
        float(np.linalg.norm(tiny_reference["x_run"]))
        + sigma * float(np.linalg.norm(c - tiny_reference["s_run"]))
    )
    rhs = const * (1.0 + 1e-6)
    eng = _Engine(tiny, SolverOptions(sigma=sigma, restart=False))
    ok = True
    details = []
    for j in range(1, 1002):
        eng.hpr_iteration()
        if j in (11, 101, 1001):
            rp, _, rd, rc = kkt_terms_raw(dims, b, c, eng.x, eng.y, eng.s)
            lhs = j * float(np.sqrt(rp * rp + rd * rd + rc * rc))
            ok = ok and lhs <= rhs
            details.append(f"k={j - 1}: {lhs:.3f}")
    assert _report(6, "kkt residual rate bound", ok,
                   f"{', '.join(details)} vs bound {rhs:.3f}")


def test_07_solution_quality_vs_oracle(quality_oracle):
    ref = quality_oracle["quality"]["objective"]
    inst = quality_instance()
    start = time.perf_counter()
    gaps = {}
    ok = True
    for name, solver in (("hpr", solve_hpr), ("admm", solve_admm),
                         ("hybrid", solve_hybrid)):
        rep = solver(inst, SolverOptions(kkt_tol=1e-5, max_iters=50000))
        gap = abs(rep.primal_obj - ref) / (abs(ref) + 1.0)
        gaps[name] = gap
        ok = ok and rep.kkt.max <= 1e-5 and gap <= 1e-4
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 60.0
    assert _report(7, "objective gap vs exact oracle", ok,
                   ", ".join(f"{k} gap {v:.2e}" for k, v in gaps.items())
                   + f", {elapsed:.1f}s")


def test_08_benchmark_scale_iteration_counts():
    start = time.perf_counter()
    inst = generate_synthetic(SyntheticConfig(T=100, m=100, m_t=100, d=3,
                                              seed=0))
    iters = {}
    for name, solver in (("hpr", solve_hpr), ("hybrid", solve_hybrid),
                         ("admm", solve_admm)):
        rep = solver(inst, SolverOptions(kkt_tol=1e-5, max_iters=20000))
        assert rep.termination == "tolerance"
        iters[name] = rep.iterations
    elapsed = time.perf_counter() - start
    ok = (iters["hpr"] <= 3500 and iters["hybrid"] <= 3000
          and iters["admm"] > iters["hpr"] and elapsed < 600.0)
    assert _report(8, "benchmark-scale iteration counts", ok,
                   f"hpr {iters['hpr']}, hybrid {iters['hybrid']}, "
                   f"admm {iters['admm']}, {elapsed:.0f}s")


def test_09_entropic_bias_shrinks_with_epsilon(tiny, quality_oracle):
    ref = quality_oracle["tiny"]["objective"]
    start = time.perf_counter()
    gaps = {}
    for eps in (0.001, 0.01):
        # Fixed sweep budget: the weight-change signal stalls transiently
        # at small epsilon long before the potentials equilibrate.
        rep = solve_ibp(tiny, IbpOptions(epsilon=eps, log_domain=True,
                                         tol=0.0, max_iters=20000,
                                         check_every=20000))
        gaps[eps] = abs(rep.primal_obj - ref) / (abs(ref) + 1.0)
    elapsed = time.perf_counter() - start
    ok = gaps[0.001] < gaps[0.01] and elapsed < 60.0
    assert _report(9, "entropic bias direction", ok,
                   f"gap(0.001) {gaps[0.001]:.2e} < gap(0.01) "
                   f"{gaps[0.01]:.2e}, {elapsed:.1f}s")


def test_10_self_barycenter_recovery():
    inst = self_barycenter_instance(m=12, d=2, seed=5)
    target = inst.distributions[0].weights
    start = time.perf_counter()
    ok = True
    details = []
    for name, solver in (("hpr", solve_hpr), ("admm", solve_admm),
                         ("hybrid", solve_hybrid)):
        rep = solver(inst, SolverOptions(kkt_tol=1e-10, max_iters=100000))
        obj = rep.primal_obj
        linf = float(np.max(np.abs(rep.barycenter - target)))
        ok = ok and obj <= 1e-8 and linf <= 1e-6
        details.append(f"{name}: obj {obj:.1e}, linf {linf:.1e}")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 5.0
    assert _report(10, "self-barycenter recovery", ok,
                   "; ".join(details) + f", {elapsed:.1f}s")


def _per_iter_secs(T, m, mt, warmup=30, batch=120, reps=5):
    inst = generate_synthetic(SyntheticConfig(T=T, m=m, m_t=mt, d=3, seed=3))
    eng = _Engine(inst, SolverOptions())
    for _ in range(warmup):
        eng.hpr_iteration()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        for _ in range(batch):
            eng.hpr_iteration()
        times.append((time.perf_counter() - t0) / batch)
    return float(np.median(times))


def test_11_near_linear_iteration_scaling():
    start = time.perf_counter()
    base = _per_iter_secs(20, 50, 50)
    ratios = {
        "2m": _per_iter_secs(20, 100, 50) / base,
        "2mt": _per_iter_secs(20, 50, 100) / base,
        "2T": _per_iter_secs(40, 50, 50) / base,
    }
    elapsed = time.perf_counter() - start
    ok = all(r <= 2.6 for r in ratios.values()) and elapsed < 300.0
    assert _report(11, "near-linear per-iteration scaling", ok,
                   ", ".join(f"{k} x{v:.2f}" for k, v in ratios.items())
                   + f", base {base * 1e6:.0f}us, {elapsed:.0f}s")
