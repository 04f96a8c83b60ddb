"""Deterministic quadrature oracles for cross-checking the sampled solver.

Everything here evaluates the same objects as the Monte Carlo iteration, but
on a dense tensor grid with composite trapezoid quadrature: the exact
multiplicative dual update, the softmax maximizer of the entropy-regularized
inner problem, its closed-form value, and a brute-force evaluation of the
dual prox objective.  Intended for low index dimension (d <= 2) and for
tests; never used inside the iteration itself.
"""

from __future__ import annotations

import dataclasses
import functools
import math

import numpy as np
from scipy.special import logsumexp

from .constants import DerivedConstants, compute_kappa_bar
from .measure import h_func
from .problem import BoxSet, SipProblem

__all__ = [
    "DensityGrid",
    "uniform_density_grid",
    "exact_dual_update_grid",
    "phi_kappa_softmax",
    "inner_max_value",
    "regularization_gap_check",
    "brute_force_dual_objective",
]

#: Default nodes per index dimension for oracle grids.
DEFAULT_NODES = 2049

_MAX_ORACLE_DIM = 2


@dataclasses.dataclass(frozen=True, eq=False)
class DensityGrid:
    """A density sampled on a fixed quadrature grid.

    Attributes
    ----------
    nodes : ndarray, shape (Q, d)
        Tensor-grid quadrature nodes over the index box.
    values : ndarray, shape (Q,)
        Density values at the nodes (with respect to Lebesgue measure).
    quad_weights : ndarray, shape (Q,)
        Positive quadrature weights; they sum to the box volume.
    """

    nodes: np.ndarray
    values: np.ndarray
    quad_weights: np.ndarray

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        qw = np.asarray(self.quad_weights, dtype=float)
        if nodes.ndim != 2:
            raise ValueError("nodes must have shape (Q, d)")
        q = nodes.shape[0]
        if values.shape != (q,) or qw.shape != (q,):
            raise ValueError("values and quad_weights must have shape (Q,)")
        if not np.all(qw > 0.0):
            raise ValueError("quadrature weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "quad_weights", qw)

    def integrate(self, values: np.ndarray | None = None) -> float:
        """Quadrature integral of ``values`` (default: the stored density)."""
        v = self.values if values is None else np.asarray(values, dtype=float)
        return float(self.quad_weights @ v)

    @property
    def mass(self) -> float:
        return self.integrate()

    def with_values(self, values: np.ndarray) -> "DensityGrid":
        return DensityGrid(self.nodes, values, self.quad_weights)


def uniform_density_grid(
    xi_box: BoxSet, n_per_dim: int = DEFAULT_NODES, level: float = 1.0
) -> DensityGrid:
    """Constant density ``level`` on a composite-trapezoid tensor grid.

    Boundary nodes carry half weight per axis; the weights of a ``d``-fold
    product sum to the box volume exactly.  Only ``d <= 2`` is supported.
    """
    if xi_box.dim > _MAX_ORACLE_DIM:
        raise ValueError(
            f"quadrature oracle supports index dimension <= {_MAX_ORACLE_DIM}"
        )
    if xi_box.volume <= 0.0:
        raise ValueError("index box must be full-dimensional")
    if n_per_dim < 2:
        raise ValueError("n_per_dim must be at least 2")
    axis_weights = []
    for i in range(xi_box.dim):
        h = xi_box.widths[i] / (n_per_dim - 1)
        w = np.full(n_per_dim, h)
        w[0] = w[-1] = 0.5 * h
        axis_weights.append(w)
    qw = functools.reduce(np.multiply.outer, axis_weights).reshape(-1)
    nodes = xi_box.grid(n_per_dim)
    return DensityGrid(nodes, np.full(nodes.shape[0], float(level)), qw)


def exact_dual_update_grid(
    lam_k: DensityGrid,
    x_k: np.ndarray,
    problem: SipProblem,
    c: DerivedConstants,
) -> DensityGrid:
    """Exact multiplicative dual update evaluated on the quadrature grid.

    The unclipped update is ``m_u^(1 - l) * lam_k^l * exp(gamma * l * g)``
    with ``l = l_exp``; if its quadrature mass exceeds the cap ``rho_bar``
    the whole density is scaled down to the cap.  This is the unique
    minimizer of :func:`brute_force_dual_objective` over feasible densities
    on the same grid.
    """
    if np.any(lam_k.values < 0.0):
        raise ValueError("input density must be nonnegative")
    g_vals = np.asarray(problem.g(x_k, lam_k.nodes), dtype=float)
    with np.errstate(divide="ignore"):
        log_lam = np.log(lam_k.values)
    z = (
        (1.0 - c.l_exp) * math.log(c.m_u)
        + c.l_exp * log_lam
        + (c.gamma * c.l_exp) * g_vals
    )
    log_mass = logsumexp(z + np.log(lam_k.quad_weights))
    if math.isnan(log_mass):
        raise ValueError("dual update normalizer is not a number")
    clip = min(math.log(c.rho_bar) - log_mass, 0.0)
    return lam_k.with_values(np.exp(z + clip))


def phi_kappa_softmax(
    x: np.ndarray,
    kappa: float,
    problem: SipProblem,
    grid: DensityGrid,
) -> DensityGrid:
    """Softmax probability density ``exp(g/kappa) / integral exp(g/kappa)``.

    This is the exact maximizer of ``E_phi[g(x, .)] - kappa * D(phi, phi_u)``
    over probability densities on the index box (``phi_u`` uniform), both in
    the continuum and for the quadrature-discretized problem on this grid.
    Computed with a max-shifted log-sum-exp so arbitrarily small ``kappa`` is
    safe.
    """
    if not kappa > 0.0:
        raise ValueError("kappa must be positive")
    g_vals = np.asarray(problem.g(x, grid.nodes), dtype=float)
    log_phi = g_vals / kappa - logsumexp(
        g_vals / kappa + np.log(grid.quad_weights)
    )
    return grid.with_values(np.exp(log_phi))


def inner_max_value(
    x: np.ndarray,
    kappa: float,
    problem: SipProblem,
    c: DerivedConstants,
    grid: DensityGrid,
) -> float:
    """Closed-form value of the regularized inner maximization at ``x``.

    Maximizes ``<Lam, g(x, .)> - kappa * b(Lam, Lam_u)`` over measures with
    mass at most ``rho_bar``.  Splitting into shape and mass, the optimal
    shape is the softmax with value ``V = kappa log integral exp(g/kappa)
    - kappa log vol``, and the optimal mass is ``rho0 * exp(V / kappa)``
    capped at ``rho_bar``, giving ``kappa * (rho_star - rho0)`` when uncapped
    and ``rho_bar * V - kappa * h(rho_bar, rho0)`` otherwise.  All evaluated
    through logarithms, so tiny ``kappa`` does not overflow.
    """
    if not kappa > 0.0:
        raise ValueError("kappa must be positive")
    rho0 = c.m_u * c.vol_xi
    g_vals = np.asarray(problem.g(x, grid.nodes), dtype=float)
    log_integral = logsumexp(g_vals / kappa + np.log(grid.quad_weights))
    v_reg = kappa * log_integral - kappa * math.log(c.vol_xi)
    # log of the unconstrained optimal mass rho0 * exp(V / kappa).
    log_rho_star = math.log(rho0) + log_integral - math.log(c.vol_xi)
    if log_rho_star <= math.log(c.rho_bar):
        return kappa * (math.exp(log_rho_star) - rho0)
    return c.rho_bar * v_reg - kappa * h_func(c.rho_bar, rho0)


def regularization_gap_check(
    x: np.ndarray,
    eps: float,
    problem: SipProblem,
    c: DerivedConstants,
    grid: DensityGrid,
) -> tuple[float, bool]:
    """Gap between the plain and regularized inner maxima at ``x``.

    The plain inner maximum over the mass-capped cone is
    ``rho_bar * max(0, sup_xi g)``; regularizing at level ``kappa_bar(eps)``
    lowers it by at most ``eps``.  Returns ``(gap, ok)`` where ``ok`` means
    ``-1e-9 <= gap <= eps + 1e-9``.
    """
    rho0 = c.m_u * c.vol_xi
    kappa_eps = compute_kappa_bar(eps, c.c_bar, c.rho_bar, rho0, c.d)
    g_vals = np.asarray(problem.g(x, grid.nodes), dtype=float)
    unreg = c.rho_bar * max(0.0, float(g_vals.max()))
    reg = inner_max_value(x, kappa_eps, problem, c, grid)
    gap = unreg - reg
    return gap, (-1e-9 <= gap <= eps + 1e-9)


def _b_quadrature(a: np.ndarray, b: np.ndarray, qw: np.ndarray) -> float:
    """Generalized KL between densities under the grid's quadrature."""
    if np.any(a < 0.0) or np.any(b < 0.0):
        raise ValueError("densities must be nonnegative")
    support = a > 0.0
    if np.any(b[support] == 0.0):
        return math.inf
    asup, bsup, wsup = a[support], b[support], qw[support]
    s = float(np.sum(wsup * asup * np.log(asup / bsup)))
    return s - float(qw @ a) + float(qw @ b)


def brute_force_dual_objective(
    candidate: DensityGrid,
    lam_k: DensityGrid,
    x_k: np.ndarray,
    problem: SipProblem,
    c: DerivedConstants,
) -> float:
    """Dual prox objective of a candidate density, by direct quadrature.

    Evaluates ``gamma * (<cand - lam_k, -g(x_k, .)> + kappa_bar *
    b(cand, uniform)) + b(cand, lam_k)`` term by term on the grid, with the
    same conventions as the weight-space formulas (``0 log 0 = 0``; the
    value is ``inf`` when the candidate puts density where ``lam_k`` has
    none).  The exact grid update minimizes this among densities with mass
    at most ``rho_bar``.
    """
    qw = candidate.quad_weights
    if candidate.nodes.shape != lam_k.nodes.shape or not np.array_equal(
        candidate.nodes, lam_k.nodes
    ):
        raise ValueError("candidate and lam_k must share the same grid")
    g_vals = np.asarray(problem.g(x_k, candidate.nodes), dtype=float)
    lin = float(qw @ ((candidate.values - lam_k.values) * (-g_vals)))
    uniform = np.full_like(candidate.values, c.m_u)
    b_u = _b_quadrature(candidate.values, uniform, qw)
    b_k = _b_quadrature(candidate.values, lam_k.values, qw)
    return c.gamma * (lin + c.kappa_bar * b_u) + b_k
