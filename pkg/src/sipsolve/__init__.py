"""Primal-dual solver for box-constrained semi-infinite programs.

The decision variable takes projected gradient steps while the constraint
index is handled by a nonnegative measure updated multiplicatively on Monte
Carlo sample points.  See :mod:`sipsolve.problem` for the problem format,
:mod:`sipsolve.solver` for the iteration, and :mod:`sipsolve.oracle` for the
deterministic quadrature cross-checks.
"""

from .constants import (
    AlgoParams,
    DerivedConstants,
    compute_alpha,
    compute_ball_ratio,
    compute_h_max,
    compute_kappa_bar,
    compute_rho_bar,
    compute_sample_size,
    compute_step_and_mu,
    derive_constants,
    eta_bisect,
    iterate_R,
)
from .measure import DiscreteMeasure, b_divergence, h_func, kl_divergence
from .oracle import (
    DensityGrid,
    brute_force_dual_objective,
    exact_dual_update_grid,
    inner_max_value,
    phi_kappa_softmax,
    regularization_gap_check,
    uniform_density_grid,
)
from .problem import (
    BoxSet,
    SipProblem,
    catalog,
    catalog_interior_problem,
    catalog_test_problem,
    validate,
)
from .solver import (
    CheckpointRecord,
    NumericalAbort,
    SampledMeasure,
    SolveReport,
    dual_update,
    evaluate_violation,
    primal_update,
    run,
    sample_index_points,
)

__version__ = "0.1.0"

__all__ = [
    "AlgoParams",
    "BoxSet",
    "CheckpointRecord",
    "DensityGrid",
    "DerivedConstants",
    "DiscreteMeasure",
    "NumericalAbort",
    "SampledMeasure",
    "SipProblem",
    "SolveReport",
    "b_divergence",
    "brute_force_dual_objective",
    "catalog",
    "catalog_interior_problem",
    "catalog_test_problem",
    "compute_alpha",
    "compute_ball_ratio",
    "compute_h_max",
    "compute_kappa_bar",
    "compute_rho_bar",
    "compute_sample_size",
    "compute_step_and_mu",
    "derive_constants",
    "dual_update",
    "eta_bisect",
    "evaluate_violation",
    "exact_dual_update_grid",
    "h_func",
    "inner_max_value",
    "iterate_R",
    "kl_divergence",
    "phi_kappa_softmax",
    "primal_update",
    "regularization_gap_check",
    "run",
    "sample_index_points",
    "uniform_density_grid",
    "validate",
]
