"""Primal-dual iteration with a Monte Carlo dual measure.

The dual variable is a nonnegative measure over the index box, represented by
fixed uniform sample points carrying log-space density weights relative to
the uniform reference.  Each round takes one projected gradient step in the
decision variable and one multiplicative (entropic prox) step in the weights;
both consume the same current pair, so the two updates commute within a
round.  Averaged iterates are reported at user-chosen checkpoints.
"""

from __future__ import annotations

import dataclasses
import time
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .constants import AlgoParams, DerivedConstants, derive_constants
from .problem import BoxSet, SipProblem

__all__ = [
    "NumericalAbort",
    "SampledMeasure",
    "CheckpointRecord",
    "SolveReport",
    "sample_index_points",
    "dual_update",
    "primal_update",
    "evaluate_violation",
    "run",
]


class NumericalAbort(RuntimeError):
    """The iteration produced non-finite values despite log-space updates.

    Attributes
    ----------
    iteration : int or None
        Round index at which the abort happened, when known.
    report : SolveReport or None
        Partial report with the checkpoints recorded before the abort.
    """

    def __init__(self, message: str, iteration: int | None = None, report=None):
        super().__init__(message)
        self.iteration = iteration
        self.report = report


@dataclasses.dataclass(frozen=True, eq=False)
class SampledMeasure:
    """Dual measure restricted to fixed sample points.

    ``log_weights[i]`` is the log of the density of the dual measure at
    ``points[i]`` relative to the uniform reference density ``m_u``; the
    implied total mass is ``m_u * (vol_xi / N) * sum(exp(log_weights))``.

    Attributes
    ----------
    points : ndarray, shape (N, d)
        Index sample points, drawn once per run.
    log_weights : ndarray, shape (N,)
        Log relative densities; all zeros at the uniform start.
    mass_cap_active : bool
        Whether the mass cap clipped the most recent update.
    """

    points: np.ndarray
    log_weights: np.ndarray
    mass_cap_active: bool = False

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        lw = np.asarray(self.log_weights, dtype=float)
        if pts.ndim != 2 or lw.shape != (pts.shape[0],):
            raise ValueError("points must be (N, d) with matching log_weights")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "log_weights", lw)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def weights(self) -> np.ndarray:
        """Relative densities ``exp(log_weights)``."""
        return np.exp(self.log_weights)

    def implied_mass(self, c: DerivedConstants) -> float:
        """Total mass of the measure under the sample-average integral."""
        return float(
            c.m_u * (c.vol_xi / self.n_points) * np.exp(logsumexp(self.log_weights))
        )


@dataclasses.dataclass(frozen=True)
class CheckpointRecord:
    """One row of the convergence report at iterate count ``k``."""

    k: int
    f_xbar: float
    violation_xbar: float
    f_xlast: float
    wall_time_s: float


@dataclasses.dataclass(eq=False)
class SolveReport:
    """Result of a solver run.

    ``x_bar`` is the average of all ``K`` recorded iterates (including the
    start point); ``checkpoints`` holds the same quantities at intermediate
    iterate counts.  ``gap_bound`` and ``violation_bound`` evaluate the
    theoretical guarantees at the configured parameters, combining the
    deterministic rate ``mu / sqrt(K)`` with the assumed Monte Carlo oracle
    accuracy ``eps_mc`` and the target accuracy ``epsilon``; the violation
    bound is the gap bound divided by the dual mass cap.
    """

    problem_name: str
    params: AlgoParams
    constants: DerivedConstants
    seed: int
    x_bar: np.ndarray
    f_bar: float
    violation_bar: float
    checkpoints: list[CheckpointRecord]
    gap_bound: float
    violation_bound: float
    final_measure: SampledMeasure

    def to_dict(self) -> dict:
        return {
            "problem_name": self.problem_name,
            "params": dataclasses.asdict(self.params),
            "constants": self.constants.to_dict(),
            "seed": self.seed,
            "x_bar": self.x_bar.tolist(),
            "f_bar": self.f_bar,
            "violation_bar": self.violation_bar,
            "checkpoints": [dataclasses.asdict(r) for r in self.checkpoints],
            "gap_bound": self.gap_bound,
            "violation_bound": self.violation_bound,
            "final_measure": {
                "points": self.final_measure.points.tolist(),
                "log_weights": self.final_measure.log_weights.tolist(),
                "mass_cap_active": self.final_measure.mass_cap_active,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolveReport":
        fm = data["final_measure"]
        return cls(
            problem_name=data["problem_name"],
            params=AlgoParams(**data["params"]),
            constants=DerivedConstants.from_dict(data["constants"]),
            seed=data["seed"],
            x_bar=np.asarray(data["x_bar"], dtype=float),
            f_bar=data["f_bar"],
            violation_bar=data["violation_bar"],
            checkpoints=[CheckpointRecord(**r) for r in data["checkpoints"]],
            gap_bound=data["gap_bound"],
            violation_bound=data["violation_bound"],
            final_measure=SampledMeasure(
                np.asarray(fm["points"], dtype=float),
                np.asarray(fm["log_weights"], dtype=float),
                bool(fm["mass_cap_active"]),
            ),
        )


def sample_index_points(N: int, xi_box: BoxSet, seed: int) -> np.ndarray:
    """Draw ``N`` uniform index points, shape ``(N, d)``.

    Uses ``numpy.random.default_rng(seed)`` (PCG64) and a single
    ``random((N, d))`` block scaled to the box, so the point set is a pure
    function of ``(N, d, bounds, seed)``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    rng = np.random.default_rng(seed)
    u = rng.random((N, xi_box.dim))
    return xi_box.lower + u * xi_box.widths


def dual_update(
    measure: SampledMeasure,
    x_k: np.ndarray,
    problem: SipProblem,
    c: DerivedConstants,
) -> SampledMeasure:
    """One multiplicative weight update of the sampled dual measure.

    Each weight is tilted by ``exp(gamma * g(x_k, xi_i) / (1 + gamma *
    kappa_bar))`` and flattened by the decay exponent ``l_exp``; the result
    is scaled down whenever the implied mass would exceed the cap
    ``rho_bar``.  All arithmetic is in log space with a max-shifted
    log-sum-exp for the normalizer.
    """
    g_vals = np.asarray(problem.g(x_k, measure.points), dtype=float)
    z = c.l_exp * measure.log_weights + (c.gamma * c.l_exp) * g_vals
    if not np.all(np.isfinite(z)):
        raise NumericalAbort("non-finite tilted log weights in dual update")
    # log of S = (vol/N) * sum exp(z); cap the scaled mass m_u*S at rho_bar.
    log_S = np.log(c.vol_xi / measure.n_points) + logsumexp(z)
    log_rho = np.log(c.rho_bar) - np.log(c.m_u)
    clip = min(log_rho - log_S, 0.0)
    return SampledMeasure(measure.points, z + clip, mass_cap_active=clip < 0.0)


def primal_update(
    x_k: np.ndarray,
    measure: SampledMeasure,
    problem: SipProblem,
    c: DerivedConstants,
) -> np.ndarray:
    """One projected gradient step on the weighted Lagrangian.

    The constraint-gradient integral is the sample average
    ``(vol_xi / N) * m_u * sum_i w_i * grad_x_g(x_k, xi_i)`` with the
    current relative densities ``w``; the step is clipped back to the box.
    The weighted sum is accumulated with numpy's pairwise reduction (no BLAS
    call) to keep results bitwise reproducible.
    """
    grads = np.asarray(problem.grad_x_g(x_k, measure.points), dtype=float)
    w = measure.weights()
    penalty = (c.vol_xi / measure.n_points) * c.m_u * (w[:, None] * grads).sum(
        axis=0
    )
    step = np.asarray(problem.grad_f(x_k), dtype=float) + penalty
    if not np.all(np.isfinite(step)):
        raise NumericalAbort("non-finite gradient in primal update")
    return problem.x_box.clip(x_k - c.gamma * step)


#: largest number of tensor-grid nodes evaluated in one block
_VIOLATION_BLOCK = 2_000_000


def evaluate_violation(
    x: np.ndarray, problem: SipProblem, grid_per_dim: int = 10001
) -> float:
    """Worst constraint value ``max_xi g(x, xi)`` on a tensor index grid.

    Negative values mean ``x`` looked feasible at this resolution.  Grids
    larger than ``_VIOLATION_BLOCK`` nodes are swept in slabs along the
    first index axis so memory stays bounded.
    """
    box = problem.xi_box
    if grid_per_dim**box.dim <= _VIOLATION_BLOCK:
        grid = box.grid(grid_per_dim)
        return float(np.asarray(problem.g(x, grid), dtype=float).max())
    axes = [
        np.linspace(lo, hi, grid_per_dim)
        for lo, hi in zip(box.lower, box.upper)
    ]
    rows_per_slab = grid_per_dim ** (box.dim - 1)
    step = max(1, _VIOLATION_BLOCK // rows_per_slab)
    best = -np.inf
    for start in range(0, grid_per_dim, step):
        mesh = np.meshgrid(axes[0][start : start + step], *axes[1:], indexing="ij")
        nodes = np.stack([m.reshape(-1) for m in mesh], axis=-1)
        best = max(best, float(np.asarray(problem.g(x, nodes), dtype=float).max()))
    return best


def run(
    problem: SipProblem,
    params: AlgoParams,
    checkpoints: Sequence[int] | None = None,
    x0: Sequence[float] | None = None,
    violation_grid: int = 10001,
    constants: DerivedConstants | None = None,
) -> SolveReport:
    """Run ``K`` primal-dual rounds and report averaged-iterate progress.

    Parameters
    ----------
    problem : SipProblem
        A validated problem instance.
    params : AlgoParams
        Iteration budget, sampling and accuracy parameters.
    checkpoints : sequence of int, optional
        Iterate counts at which to record a report row; defaults to ``[K]``.
        Each entry must lie in ``[1, K]``.  A checkpoint ``k`` reports the
        average of the first ``k`` iterates.
    x0 : sequence of float, optional
        Start point; defaults to the center of the decision box.
    violation_grid : int
        Grid resolution per index dimension for checkpoint violations.
    constants : DerivedConstants, optional
        Reuse precomputed constants (must match problem and params).

    Raises
    ------
    NumericalAbort
        If an update produces non-finite values; the exception carries the
        iteration index and a partial report.
    """
    t0 = time.perf_counter()
    c = constants if constants is not None else derive_constants(problem, params)
    targets = sorted(set(int(k) for k in checkpoints)) if checkpoints else [params.K]
    if targets[0] < 1 or targets[-1] > params.K:
        raise ValueError("checkpoints must lie in [1, K]")
    target_set = set(targets)

    points = sample_index_points(params.N, problem.xi_box, params.seed)
    measure = SampledMeasure(points, np.zeros(params.N))
    x = problem.x_box.clip(
        np.asarray(x0, dtype=float) if x0 is not None else problem.x_box.center
    )
    x_sum = x.copy()
    count = 1
    records: list[CheckpointRecord] = []

    def snapshot(at: int) -> None:
        x_bar = x_sum / at
        records.append(
            CheckpointRecord(
                k=at,
                f_xbar=float(problem.f(x_bar)),
                violation_xbar=evaluate_violation(x_bar, problem, violation_grid),
                f_xlast=float(problem.f(x)),
                wall_time_s=time.perf_counter() - t0,
            )
        )

    def build_report() -> SolveReport:
        x_bar = x_sum / count
        eps, eps_mc = params.epsilon, params.eps_mc
        gap_bound = (
            c.mu / np.sqrt(params.K)
            + np.sqrt(c.d_x_sq) * eps_mc
            + 1.5 * c.gamma * eps_mc**2
            + eps
        )
        return SolveReport(
            problem_name=problem.name,
            params=params,
            constants=c,
            seed=params.seed,
            x_bar=x_bar,
            f_bar=float(problem.f(x_bar)),
            violation_bar=evaluate_violation(x_bar, problem, violation_grid),
            checkpoints=records,
            gap_bound=float(gap_bound),
            violation_bound=float(gap_bound / c.rho_bar),
            final_measure=measure,
        )

    if 1 in target_set:
        snapshot(1)
    for k in range(params.K - 1):
        try:
            x_next = primal_update(x, measure, problem, c)
            measure = dual_update(measure, x, problem, c)
        except NumericalAbort as err:
            err.iteration = k
            err.report = build_report()
            raise
        x = x_next
        x_sum += x
        count += 1
        if count in target_set:
            snapshot(count)
    return build_report()
