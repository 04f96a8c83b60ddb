"""Derivation of run parameters and theory constants from a problem instance.

Everything the iteration needs (step size, dual mass cap, regularization
level, weight decay exponent) is computed here from the problem's bound
constants and the algorithm parameters, in a fixed dependency order:
Slater margin -> dual mass cap -> geometry ratios -> mass divergence bound ->
prox-diameter bounds -> regularization level -> step size.  Sample-size
bounds for the Monte Carlo dual update live here as well.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np

from .measure import h_func
from .problem import BoxSet, SipProblem

__all__ = [
    "AlgoParams",
    "DerivedConstants",
    "compute_alpha",
    "compute_rho_bar",
    "compute_ball_ratio",
    "compute_h_max",
    "compute_kappa_bar",
    "compute_step_and_mu",
    "derive_constants",
    "iterate_R",
    "eta_bisect",
    "compute_sample_size",
]

#: exp() arguments above this overflow float64; used to report the density
#: cap as inf while keeping its exact logarithm.
_EXP_MAX = 709.0


@dataclasses.dataclass(frozen=True)
class AlgoParams:
    """User-chosen parameters of a solver run.

    Parameters
    ----------
    K : int
        Number of iterations (averaged iterates use all of them).
    epsilon : float
        Target accuracy; drives the regularization level ``kappa_bar``.
    theta : float
        Positive slack added to the dual mass cap.
    rho0 : float
        Mass of the uniform reference measure (the dual starting point).
    N : int
        Number of Monte Carlo index points.
    delta : float
        Confidence parameter in (0, 1) for the sample-size bounds.
    seed : int
        Seed for the index-point sampler.
    eps_mc : float
        Accuracy budget assumed for the sampled dual oracle when reporting
        the theoretical gap bounds; not consumed by the iteration itself.
    """

    K: int
    epsilon: float = 1e-3
    theta: float = 1.0
    rho0: float = 1.0
    N: int = 1000
    delta: float = 0.1
    seed: int = 1
    eps_mc: float = 0.05

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.N < 1:
            raise ValueError("N must be at least 1")
        for label in ("epsilon", "theta", "rho0", "eps_mc"):
            if not (getattr(self, label) > 0.0):
                raise ValueError(f"{label} must be positive")
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclasses.dataclass(frozen=True)
class DerivedConstants:
    """Constants derived from a problem and :class:`AlgoParams`.

    Attributes
    ----------
    alpha : float
        Slater feasibility margin ``min_xi -g(slater_point, xi)``.
    rho_bar : float
        Cap on the dual total mass.
    r_xi : float
        Radius of the largest ball inscribed in the index box.
    ratio_r : float
        Volume ratio of that ball to the index box, in (0, 1].
    h_max : float
        Maximum of the scalar mass divergence ``h(rho, rho0)`` over
        ``rho in [0, rho_bar]``.
    c_bar, c_prime, c_max : float
        Prox-diameter bounds; ``c_prime`` adds the regularization-dependent
        term to ``c_bar`` and ``c_max = max(rho0, c_prime)`` enters the step
        size.
    kappa_bar : float
        Regularization level in (0, 1] at the configured accuracy.
    gamma : float
        Step size of both updates.
    l_exp : float
        Weight decay exponent ``1 / (1 + gamma * kappa_bar)``.
    mu : float
        Rate coefficient; ``mu * gamma = 2 * (c_max + d_x_sq) / sqrt(K)``.
    m_u : float
        Uniform reference density level ``rho0 / vol_xi``.
    density_cap : float
        Upper bound ``exp(g_max / kappa_bar)`` on normalized dual densities;
        inf when the exponent overflows float64.
    log_density_cap : float
        Exact logarithm of ``density_cap`` (always finite).
    d : int
        Index dimension.
    vol_xi : float
        Volume of the index box.
    d_x_sq : float
        Squared diameter of the decision box (sum of squared side lengths).
    """

    alpha: float
    rho_bar: float
    r_xi: float
    ratio_r: float
    h_max: float
    c_bar: float
    c_prime: float
    c_max: float
    kappa_bar: float
    gamma: float
    l_exp: float
    mu: float
    m_u: float
    density_cap: float
    log_density_cap: float
    d: int
    vol_xi: float
    d_x_sq: float

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "DerivedConstants":
        return cls(**data)


def compute_alpha(problem: SipProblem, grid_per_dim: int = 2001) -> float:
    """Slater margin: grid minimum of ``-g(slater_point, .)`` minus a margin.

    The safety margin per grid cell is ``slope * cell_radius`` where the
    slope is the smaller of the documented bound ``L_g_xi`` and the steepest
    finite-difference slope observed on the grid itself; for an index-constant
    constraint the margin is exactly zero.

    Raises
    ------
    ValueError
        If the resulting margin-adjusted minimum is not strictly positive.
    """
    box = problem.xi_box
    if box.volume <= 0.0:
        raise ValueError("index box must be full-dimensional")
    grid = box.grid(grid_per_dim)
    vals = np.asarray(problem.g(problem.slater_point, grid), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("g(slater_point, .) is not finite on the grid")
    steps = box.widths / (grid_per_dim - 1)
    tensor = vals.reshape((grid_per_dim,) * box.dim)
    slopes = np.array(
        [
            np.abs(np.diff(tensor, axis=axis)).max() / steps[axis]
            for axis in range(box.dim)
        ]
    )
    observed = float(np.linalg.norm(slopes))
    cell_radius = 0.5 * float(np.linalg.norm(steps))
    alpha = float(-vals.max()) - min(problem.L_g_xi, observed) * cell_radius
    if not alpha > 0.0:
        raise ValueError(
            f"Slater margin is not positive (alpha = {alpha:.6g}); "
            "the slater_point is not safely feasible at this grid resolution"
        )
    return alpha


def compute_rho_bar(problem: SipProblem, theta: float, alpha: float) -> float:
    """Dual mass cap ``(f(slater_point) - dual_lb) / alpha + theta``."""
    if not theta > 0.0:
        raise ValueError("theta must be positive")
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    rho_bar = (problem.f(problem.slater_point) - problem.dual_lb) / alpha + theta
    if not rho_bar > 0.0:
        raise ValueError("dual mass cap is not positive; check dual_lb")
    return float(rho_bar)


def compute_ball_ratio(xi_box: BoxSet) -> tuple[float, float]:
    """Inscribed-ball radius and ball-to-box volume ratio of the index box.

    Returns
    -------
    (r_xi, ratio_r) : tuple of float
        ``r_xi`` is half the smallest side length; ``ratio_r`` is the volume
        of the ball with that radius divided by the box volume, always in
        (0, 1].
    """
    if xi_box.volume <= 0.0:
        raise ValueError("index box must be full-dimensional")
    d = xi_box.dim
    r_xi = xi_box.min_half_width
    unit_ball = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
    ratio = unit_ball * r_xi**d / xi_box.volume
    return r_xi, float(ratio)


def compute_h_max(rho_bar: float, rho0: float) -> float:
    """Maximum of ``h_func(., rho0)`` over ``[0, rho_bar]``.

    The mass divergence is convex in its first argument, so the maximum sits
    at an endpoint: ``h(0, rho0) = rho0`` or ``h(rho_bar, rho0)``.
    """
    return max(float(rho0), h_func(rho_bar, rho0))


def compute_kappa_bar(
    eps: float, c_bar: float, rho_bar: float, rho0: float, d: int
) -> float:
    """Regularization level for accuracy ``eps``.

    The smallest of ``eps / (2 c_bar)``, ``(eps / (2 rho_bar d))^2``,
    ``eps / rho0`` and 1; each term caps one contribution of the smoothing
    to the optimality gap.
    """
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    kappa = min(
        eps / (2.0 * c_bar),
        (eps / (2.0 * rho_bar * d)) ** 2,
        eps / rho0,
        1.0,
    )
    if not kappa > 0.0:
        raise ValueError("regularization level collapsed to zero")
    return float(kappa)


def compute_step_and_mu(
    K: int,
    c_max: float,
    d_x_sq: float,
    rho_bar: float,
    g_max: float,
    l_f: float,
    l_g_x: float,
) -> tuple[float, float]:
    """Step size and rate coefficient for a K-iteration run.

    With ``q = rho_bar * g_max^2 + 2 (l_f + rho_bar * l_g_x)^2`` the step is
    ``gamma = sqrt(2 (c_max + d_x_sq) / (K q))`` and the rate coefficient is
    ``mu = sqrt(2 (c_max + d_x_sq) q)``, so that
    ``mu * gamma = 2 (c_max + d_x_sq) / sqrt(K)`` holds exactly.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    q = rho_bar * g_max**2 + 2.0 * (l_f + rho_bar * l_g_x) ** 2
    num = 2.0 * (c_max + d_x_sq)
    gamma = math.sqrt(num / (K * q))
    mu = math.sqrt(num * q)
    return gamma, mu


def derive_constants(
    problem: SipProblem, params: AlgoParams, alpha_grid: int = 2001
) -> DerivedConstants:
    """Run the full constant-derivation pipeline for a problem and params."""
    alpha = compute_alpha(problem, alpha_grid)
    rho_bar = compute_rho_bar(problem, params.theta, alpha)
    if params.rho0 > rho_bar:
        raise ValueError(
            f"rho0 = {params.rho0:.6g} exceeds the dual mass cap "
            f"{rho_bar:.6g}; the uniform start would be infeasible"
        )
    r_xi, ratio_r = compute_ball_ratio(problem.xi_box)
    h_max = compute_h_max(rho_bar, params.rho0)
    d = problem.dim_xi
    d_xi_sq = problem.xi_box.diameter_sq
    c_bar = (
        rho_bar * problem.L_g_xi * (r_xi + d_xi_sq)
        - rho_bar * math.log(ratio_r)
        + h_max
    )
    kappa_bar = compute_kappa_bar(
        params.epsilon, c_bar, rho_bar, params.rho0, d
    )
    c_prime = c_bar - rho_bar * d * math.log(kappa_bar)
    c_max = max(params.rho0, c_prime)
    d_x_sq = problem.x_box.diameter_sq
    gamma, mu = compute_step_and_mu(
        params.K, c_max, d_x_sq, rho_bar, problem.G_max, problem.L_f,
        problem.L_g_x,
    )
    l_exp = 1.0 / (1.0 + gamma * kappa_bar)
    vol_xi = problem.xi_box.volume
    log_cap = problem.G_max / kappa_bar
    density_cap = math.exp(log_cap) if log_cap <= _EXP_MAX else math.inf
    return DerivedConstants(
        alpha=alpha,
        rho_bar=rho_bar,
        r_xi=r_xi,
        ratio_r=ratio_r,
        h_max=h_max,
        c_bar=c_bar,
        c_prime=c_prime,
        c_max=c_max,
        kappa_bar=kappa_bar,
        gamma=gamma,
        l_exp=l_exp,
        mu=mu,
        m_u=params.rho0 / vol_xi,
        density_cap=density_cap,
        log_density_cap=log_cap,
        d=d,
        vol_xi=vol_xi,
        d_x_sq=d_x_sq,
    )


def iterate_R(beta: float, l_exp: float, k: int) -> float:
    """Apply the error-amplification map k times starting from ``beta``.

    One application sends ``r`` to ``(1 + beta) ((1 + r) / (1 - r))^l_exp - 1``
    with the same ``beta`` in every application.  The map is increasing and
    satisfies ``R(r) > r`` on (0, 1), so the iterates grow; once an iterate
    reaches 1 the result is reported as ``inf``.
    """
    if not 0.0 < beta:
        raise ValueError("beta must be positive")
    if not 0.5 <= l_exp < 1.0:
        raise ValueError("l_exp must lie in [1/2, 1)")
    if k < 0:
        raise ValueError("k must be nonnegative")
    r = float(beta)
    for _ in range(k):
        if r >= 1.0:
            return math.inf
        r = (1.0 + beta) * ((1.0 + r) / (1.0 - r)) ** l_exp - 1.0
    return r


def eta_bisect(eps_target: float, K: int, l_exp: float) -> float:
    """Largest ``beta`` whose ``K - 1``-fold amplification stays below target.

    Bisects for the largest ``beta`` with
    ``iterate_R(beta, l_exp, K - 1) <= eps_target``.  Since each application
    strictly increases the iterate, the returned value is strictly smaller
    than ``eps_target``.  For ``K == 1`` there is no amplification and
    ``eps_target`` itself is returned.
    """
    if not eps_target > 0.0:
        raise ValueError("eps_target must be positive")
    if K < 1:
        raise ValueError("K must be at least 1")
    if K == 1:
        return float(eps_target)
    lo = 0.0
    hi = min(float(eps_target), 1.0 - 1e-12)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if iterate_R(mid, l_exp, K - 1) <= eps_target:
            lo = mid
        else:
            hi = mid
    if not lo > 0.0:
        raise ValueError(
            "no positive accuracy survives the amplification bound; "
            "eps_target is too small for this K"
        )
    return lo


def compute_sample_size(
    eps_mc: float,
    delta: float,
    K: int,
    l_g_x: float,
    rho0: float,
    density_cap: float,
    l_exp: float,
    n_cap: int = 10**9,
) -> int:
    """Index sample size sufficient for accuracy ``eps_mc`` at confidence delta.

    Takes the larger of a concentration bound for the sampled constraint
    gradient and a bound controlling relative weight errors after
    amplification over K rounds, then rounds up.  Both grow with the density
    cap; when they exceed ``n_cap`` (or overflow, as happens whenever the cap
    itself is inf) the result is clamped to ``n_cap`` with a warning.
    """
    if not (eps_mc > 0.0 and 0.0 < delta < 1.0):
        raise ValueError("need eps_mc > 0 and delta in (0, 1)")
    if K < 1 or n_cap < 1:
        raise ValueError("K and n_cap must be at least 1")
    log_term = math.log(4.0 * K / delta)
    t1 = 2.0 * (l_g_x * density_cap * rho0 / eps_mc) ** 2 * log_term
    target = eps_mc / (2.0 * rho0 * l_g_x * density_cap)
    if target > 0.0 and math.isfinite(t1):
        eta = eta_bisect(target, K, l_exp)
        t2 = log_term / (2.0 * eta**2)
        needed = max(t1, t2)
    else:
        needed = math.inf
    if needed > n_cap:
        warnings.warn(
            f"required sample size {needed:.3g} exceeds the cap {n_cap}; "
            "using the cap (the high-probability guarantee no longer applies)",
            RuntimeWarning,
            stacklevel=2,
        )
        return int(n_cap)
    return int(math.ceil(needed))
