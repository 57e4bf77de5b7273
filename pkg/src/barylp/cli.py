"""Command-line front end: generate instances, solve them, compare methods.

Subcommands
-----------
``generate``
    Build a synthetic instance directory from mixture-sampled supports.
``solve``
    Run one method on an instance directory and write the convergence
    CSV, barycenter CSV, and summary JSON.
``compare``
    Run several methods on one instance and write a comparison table.

Exit codes are stable: 0 solved to tolerance, 2 iteration or wall-time
budget exhausted, 3 numeric failure, 64 usage error.  The
``BARYLP_THREADS`` environment variable caps the BLAS thread count for
the kernels; it is read before numpy is first imported.
"""

import argparse
import json
import os
import sys

import numpy as np

from .datagen import SyntheticConfig, generate_synthetic
from .ibp import IbpOptions, solve_ibp
from .io import (load_instance, save_instance, write_barycenter_csv,
                 write_compare_csv, write_history_csv, write_pgm,
                 write_summary_json)
from .solvers import (NumericFailure, SolverOptions, solve_admm, solve_hpr,
                      solve_hybrid)

__all__ = ["main"]

EXIT_SOLVED = 0
EXIT_BUDGET = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64

_PAPER_TIME_LIMIT = 3600.0

_LP_SOLVERS = {"hpr": solve_hpr, "admm": solve_admm, "hybrid": solve_hybrid}


class _Parser(argparse.ArgumentParser):
    """argparse with the usage exit code pinned to 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser():
    parser = _Parser(
        prog="barylp",
        description="Matrix-free LP solvers for fixed-support Wasserstein "
                    "barycenters.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    gen = sub.add_parser("generate", parents=[],
                         help="write a synthetic instance directory")
    gen.add_argument("--T", type=int, required=True,
                     help="number of sample distributions")
    gen.add_argument("--m", type=int, required=True,
                     help="barycenter support size (at least 2)")
    gen.add_argument("--mt", type=str, required=True,
                     help="support size per distribution (int or comma list)")
    gen.add_argument("--d", type=int, default=3, help="ambient dimension")
    gen.add_argument("--seed", type=int, default=0, help="RNG seed")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--write-cost", action="store_true",
                     help="also store binary ground-cost matrices")

    solve = sub.add_parser("solve", help="run one method on an instance")
    solve.add_argument("instance", help="instance directory or manifest path")
    solve.add_argument("--method", default="hpr",
                       choices=["hpr", "admm", "hybrid", "ibp"])
    solve.add_argument("--sigma", type=float, default=1.0,
                       help="penalty parameter for the LP methods")
    solve.add_argument("--gamma", type=float, default=1.9,
                       help="ADMM step length in (0, 2)")
    solve.add_argument("--kkt-tol", type=float, default=1e-5,
                       help="relative KKT residual tolerance")
    solve.add_argument("--max-iters", type=int, default=10000)
    solve.add_argument("--check-every", type=int, default=50,
                       help="iterations between residual checks")
    solve.add_argument("--restart", choices=["on", "off"], default="on",
                       help="restart policy for the Halpern method")
    solve.add_argument("--epsilon", type=float, default=0.01,
                       help="entropic regularization for --method ibp")
    solve.add_argument("--log-domain", action="store_true",
                       help="run the scaling baseline in log space")
    solve.add_argument("--time-limit", type=float, default=None,
                       help="wall-time budget in seconds (default: none)")
    solve.add_argument("--paper-protocol", action="store_true",
                       help="apply the benchmark budget (one hour)")
    solve.add_argument("--seed", type=int, default=None,
                       help="recorded in the summary; solves are "
                            "deterministic")
    solve.add_argument("--out", default=None,
                       help="report directory (default: instance dir)")
    solve.add_argument("--pgm", metavar="HxW", default=None,
                       help="also render the barycenter as an HxW PGM image")
    solve.add_argument("--trace", action="store_true",
                       help="print checkpoint residuals to stderr")

    cmp_ = sub.add_parser("compare", help="run several methods and tabulate")
    cmp_.add_argument("instance", help="instance directory or manifest path")
    cmp_.add_argument("--methods", default="hpr,admm,hybrid,ibp",
                      help="comma list; ibp may carry an epsilon "
                           "as ibp:0.001")
    cmp_.add_argument("--sigma", type=float, default=1.0)
    cmp_.add_argument("--gamma", type=float, default=1.9)
    cmp_.add_argument("--kkt-tol", type=float, default=1e-5)
    cmp_.add_argument("--max-iters", type=int, default=10000)
    cmp_.add_argument("--check-every", type=int, default=50)
    cmp_.add_argument("--restart", choices=["on", "off"], default="on")
    cmp_.add_argument("--epsilon", type=float, default=0.01,
                      help="epsilon for plain 'ibp' method tokens")
    cmp_.add_argument("--log-domain", action="store_true")
    cmp_.add_argument("--time-limit", type=float, default=None)
    cmp_.add_argument("--paper-protocol", action="store_true")
    cmp_.add_argument("--seed", type=int, default=None)
    cmp_.add_argument("--reference-objective", type=float, default=None,
                      help="oracle objective for the gap column (default: "
                           "best-KKT method)")
    cmp_.add_argument("--out", default=None,
                      help="report directory (default: instance dir)")

    return parser


def _parse_mt(text, T, parser):
    parts = text.split(",")
    try:
        values = [int(p) for p in parts]
    except ValueError:
        parser.error(f"--mt expects an int or comma list, got {text!r}")
    if len(values) == 1:
        return values[0]
    if len(values) != T:
        parser.error(f"--mt lists {len(values)} sizes for --T {T}")
    return values


def cmd_generate(args, parser):
    if args.m < 2:
        parser.error("--m must be at least 2: single-point barycenter "
                     "supports are rejected by the LP formulation")
    if args.T < 1:
        parser.error("--T must be at least 1")
    m_t = _parse_mt(args.mt, args.T, parser)
    config = SyntheticConfig(T=args.T, m=args.m, m_t=m_t, d=args.d,
                             seed=args.seed)
    instance = generate_synthetic(config)
    provenance = {
        "generator": "synthetic-gaussian-mixture",
        "seed": args.seed,
        "requested": {"T": args.T, "m": args.m, "m_t": m_t, "d": args.d},
    }
    manifest = save_instance(instance, args.out, write_cost=args.write_cost,
                             extra={"provenance": provenance})
    print(f"wrote {manifest}")
    return EXIT_SOLVED


def _solver_options(args):
    time_limit = args.time_limit
    if args.paper_protocol and time_limit is None:
        time_limit = _PAPER_TIME_LIMIT
    return SolverOptions(
        sigma=args.sigma, gamma=args.gamma, kkt_tol=args.kkt_tol,
        max_iters=args.max_iters, check_every=args.check_every,
        restart=(args.restart == "on"), time_limit=time_limit,
        trace=getattr(args, "trace", False),
    )


def _ibp_options(args, epsilon=None):
    time_limit = args.time_limit
    if args.paper_protocol and time_limit is None:
        time_limit = _PAPER_TIME_LIMIT
    return IbpOptions(
        epsilon=args.epsilon if epsilon is None else epsilon,
        max_iters=args.max_iters, check_every=args.check_every,
        log_domain=args.log_domain, time_limit=time_limit,
    )


def _exit_for(termination):
    if termination == "tolerance":
        return EXIT_SOLVED
    return EXIT_BUDGET


def _lp_summary(report, seed):
    return {
        "method": report.method,
        "iterations": report.iterations,
        "termination": report.termination,
        "kkt": {
            "primal": report.kkt.primal,
            "nonneg": report.kkt.nonneg,
            "dual": report.kkt.dual,
            "compl": report.kkt.compl,
            "max": report.kkt.max,
        },
        "primal_obj": report.primal_obj,
        "dual_obj": report.dual_obj,
        "elapsed_secs": report.elapsed_secs,
        "restarts": report.restarts,
        "switch_iteration": report.switch_iteration,
        "sigma": report.sigma,
        "gamma": report.gamma,
        "seed": seed,
    }


def _ibp_summary(report, seed):
    return {
        "method": "ibp",
        "iterations": report.iterations,
        "termination": report.termination,
        "marginal_error": report.marginal_error,
        "weight_change": report.weight_change,
        "primal_obj": report.primal_obj,
        "elapsed_secs": report.elapsed_secs,
        "epsilon": report.epsilon,
        "log_domain": report.log_domain,
        "seed": seed,
    }


def _parse_pgm_shape(text, m, parser):
    try:
        h, w = (int(v) for v in text.lower().split("x"))
    except ValueError:
        parser.error(f"--pgm expects HxW, got {text!r}")
    if h * w != m:
        parser.error(f"--pgm {text} does not match barycenter size {m}")
    return h, w


def cmd_solve(args, parser):
    instance = load_instance(args.instance)
    out_dir = args.out or (args.instance if os.path.isdir(args.instance)
                           else os.path.dirname(args.instance))
    os.makedirs(out_dir, exist_ok=True)

    try:
        if args.method == "ibp":
            report = solve_ibp(instance, _ibp_options(args))
            weights = report.barycenter
            summary = _ibp_summary(report, args.seed)
        else:
            report = _LP_SOLVERS[args.method](instance, _solver_options(args))
            weights = report.barycenter
            summary = _lp_summary(report, args.seed)
    except (NumericFailure, FloatingPointError) as exc:
        print(f"barylp solve: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    write_history_csv(os.path.join(out_dir, "history.csv"), report.history)
    write_barycenter_csv(os.path.join(out_dir, "barycenter.csv"), weights,
                         instance.bary_support)
    write_summary_json(os.path.join(out_dir, "summary.json"), summary)
    if args.pgm:
        h, w = _parse_pgm_shape(args.pgm, instance.m, parser)
        write_pgm(os.path.join(out_dir, "barycenter.pgm"),
                  weights.reshape(h, w))

    code = _exit_for(report.termination)
    print(f"{args.method}: {report.termination} after {report.iterations} "
          f"iterations, objective {summary['primal_obj']:.9e}")
    return code


def _parse_method_tokens(text, parser):
    tokens = [tok.strip() for tok in text.split(",") if tok.strip()]
    if len(tokens) < 2:
        parser.error("--methods needs at least 2 methods to compare")
    parsed = []
    for tok in tokens:
        if tok in _LP_SOLVERS:
            parsed.append((tok, None))
        elif tok == "ibp":
            parsed.append(("ibp", None))
        elif tok.startswith("ibp:"):
            try:
                parsed.append(("ibp", float(tok[4:])))
            except ValueError:
                parser.error(f"bad ibp epsilon in {tok!r}")
        else:
            parser.error(f"unknown method {tok!r}")
    return parsed


def cmd_compare(args, parser):
    # Validate the method list before touching the filesystem.
    methods = _parse_method_tokens(args.methods, parser)
    instance = load_instance(args.instance)
    out_dir = args.out or (args.instance if os.path.isdir(args.instance)
                           else os.path.dirname(args.instance))
    os.makedirs(out_dir, exist_ok=True)

    rows = []
    for name, epsilon in methods:
        label = name if epsilon is None and name != "ibp" else (
            f"ibp({args.epsilon if epsilon is None else epsilon:g})"
            if name == "ibp" else name
        )
        try:
            if name == "ibp":
                report = solve_ibp(instance, _ibp_options(args, epsilon))
                rows.append({
                    "method": label, "iterations": report.iterations,
                    "kkt_max": None,
                    "marginal_error": report.marginal_error,
                    "primal_obj": report.primal_obj,
                    "elapsed_secs": report.elapsed_secs,
                })
            else:
                report = _LP_SOLVERS[name](instance, _solver_options(args))
                rows.append({
                    "method": label, "iterations": report.iterations,
                    "kkt_max": report.kkt.max, "marginal_error": None,
                    "primal_obj": report.primal_obj,
                    "elapsed_secs": report.elapsed_secs,
                })
        except (NumericFailure, FloatingPointError) as exc:
            print(f"barylp compare: {label} failed: {exc}", file=sys.stderr)
            rows.append({
                "method": label, "iterations": 0, "kkt_max": None,
                "marginal_error": None, "primal_obj": float("nan"),
                "elapsed_secs": 0.0, "failed": True,
            })

    reference = args.reference_objective
    if reference is None:
        lp_rows = [r for r in rows
                   if r.get("kkt_max") is not None and not r.get("failed")]
        if lp_rows:
            reference = min(lp_rows, key=lambda r: r["kkt_max"])["primal_obj"]
    for row in rows:
        if reference is None or not np.isfinite(row["primal_obj"]):
            row["gap_vs_best"] = float("nan")
        else:
            row["gap_vs_best"] = (abs(row["primal_obj"] - reference)
                                  / (abs(reference) + 1.0))

    path = write_compare_csv(os.path.join(out_dir, "compare.csv"), rows)
    _print_compare_table(rows)
    print(f"wrote {path}")
    return EXIT_SOLVED


def _print_compare_table(rows):
    header = (f"{'method':<12} {'iters':>7} {'residual':>12} "
              f"{'primal_obj':>16} {'gap_vs_best':>12} {'secs':>9}")
    print(header)
    print("-" * len(header))
    for r in rows:
        if r.get("failed"):
            print(f"{r['method']:<12} {'-':>7} {'failed':>12} {'-':>16} "
                  f"{'-':>12} {'-':>9}")
            continue
        resid = r["kkt_max"] if r["kkt_max"] is not None \
            else r["marginal_error"]
        print(f"{r['method']:<12} {r['iterations']:>7d} {resid:>12.3e} "
              f"{r['primal_obj']:>16.9e} {r['gap_vs_best']:>12.3e} "
              f"{r['elapsed_secs']:>9.3f}")


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.error("a command is required (generate, solve, compare)")
    if args.command == "generate":
        return cmd_generate(args, parser)
    if args.command == "solve":
        return cmd_solve(args, parser)
    if args.command == "compare":
        return cmd_compare(args, parser)
    parser.error(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
