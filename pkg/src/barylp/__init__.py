"""Matrix-free first-order LP solvers for fixed-support Wasserstein
barycenters and optimal transport.

The package solves the barycenter linear program with a Halpern-
accelerated Peaceman-Rachford method whose inner normal equations have
a closed-form linear-time solve, plus an accelerated ADMM variant, a
hybrid schedule, and an entropic scaling baseline for comparison.

Set ``BARYLP_THREADS`` before launching Python to cap the BLAS thread
count used by the dense kernels; it is propagated to the usual
OMP/OpenBLAS/MKL variables when those are not already set.
"""

import os as _os

_threads = _os.environ.get("BARYLP_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)
del _os, _threads

from .datagen import (SyntheticConfig, build_cost, generate_synthetic,
                      image_to_distribution, kmeans_select)
from .flops import FlopCounter
from .ibp import IbpOptions, IbpRecord, IbpReport, solve_ibp
from .io import (load_instance, read_cost_matrix, read_pgm, save_instance,
                 write_barycenter_csv, write_cost_matrix, write_history_csv,
                 write_pgm, write_summary_json)
from .normal import (NormalWorkspace, project_affine, solve_ot_normal,
                     solve_wbp_normal)
from .ot import OtProblem, apply_ot_A, apply_ot_Astar, ot_lp_data
from .problem import (DiscreteDistribution, Dims, DualVector, KktResidual,
                      PrimalVector, WbpInstance, apply_A, apply_Astar,
                      dual_objective, kkt_residual, lp_data, primal_objective)
from .solvers import (ConvergenceRecord, NumericFailure, SolveReport,
                      SolverOptions, solve_admm, solve_hpr, solve_hybrid)
from .splitting import (TwoBlockProblem, halpern_weight,
                        make_dual_lp_problem, verify_equivalence)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceRecord",
    "Dims",
    "DiscreteDistribution",
    "DualVector",
    "FlopCounter",
    "IbpOptions",
    "IbpRecord",
    "IbpReport",
    "KktResidual",
    "NormalWorkspace",
    "NumericFailure",
    "OtProblem",
    "PrimalVector",
    "SolveReport",
    "SolverOptions",
    "SyntheticConfig",
    "TwoBlockProblem",
    "WbpInstance",
    "apply_A",
    "apply_Astar",
    "apply_ot_A",
    "apply_ot_Astar",
    "build_cost",
    "dual_objective",
    "generate_synthetic",
    "halpern_weight",
    "image_to_distribution",
    "kkt_residual",
    "kmeans_select",
    "load_instance",
    "lp_data",
    "make_dual_lp_problem",
    "ot_lp_data",
    "primal_objective",
    "project_affine",
    "read_cost_matrix",
    "read_pgm",
    "save_instance",
    "solve_admm",
    "solve_hpr",
    "solve_hybrid",
    "solve_ibp",
    "solve_ot_normal",
    "solve_wbp_normal",
    "verify_equivalence",
    "write_barycenter_csv",
    "write_cost_matrix",
    "write_history_csv",
    "write_pgm",
    "write_summary_json",
    "__version__",
]
