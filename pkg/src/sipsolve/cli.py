"""Command line interface: solve, check, and constants subcommands.

A single JSON config file drives all subcommands::

    {
      "problem": "benchmark",             // or {"name": ..., "overrides": {...}}
      "params": {"K": 60000, "epsilon": 0.001, "N": 1000, "seed": 1},
      "checkpoints": [500, 1000, 60000],  // optional, default [K]
      "violation_grid": 10001,            // optional
      "x0": [0.0, 0.1],                   // optional, default box center
      "output": "out/report.csv",         // optional, default stdout
      "format": "csv"                     // "csv" (default) or "json"
    }

``overrides`` may replace ``x_box`` / ``xi_box`` (as ``{"lower": [...],
"upper": [...]}``), ``slater_point``, ``dual_lb`` and any of the bound
constants of a catalog problem.

Exit codes: 0 success, 1 property-check failure, 2 config error,
3 problem validation error, 4 numerical abort.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .constants import AlgoParams, derive_constants
from .measure import b_divergence, h_func, kl_divergence
from .oracle import (
    brute_force_dual_objective,
    exact_dual_update_grid,
    phi_kappa_softmax,
    regularization_gap_check,
    uniform_density_grid,
)
from .problem import BoxSet, SipProblem, catalog, validate
from .solver import NumericalAbort, SolveReport, run

__all__ = [
    "ConfigError",
    "ProblemBuildError",
    "RunConfig",
    "load_config",
    "build_problem",
    "report_to_csv",
    "report_to_json",
    "cmd_solve",
    "cmd_check",
    "cmd_constants",
    "main",
]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4

#: CSV header pinned by the report format.
CSV_HEADER = "K,f_xbar,violation_xbar,f_xlast,wall_time_s"


class ConfigError(Exception):
    """The config file is missing, unparsable, or structurally wrong."""


class ProblemBuildError(Exception):
    """The configured problem failed to build or validate."""


_TOP_KEYS = {
    "problem",
    "params",
    "checkpoints",
    "violation_grid",
    "x0",
    "output",
    "format",
}
_OVERRIDE_KEYS = {
    "x_box",
    "xi_box",
    "slater_point",
    "dual_lb",
    "L_f",
    "L_g_x",
    "L_g_xi",
    "G_max",
}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Parsed contents of a config file."""

    problem_name: str
    overrides: dict
    params: AlgoParams
    checkpoints: tuple[int, ...] | None
    violation_grid: int
    x0: tuple[float, ...] | None
    output: str | None
    fmt: str


def load_config(path: str | Path) -> RunConfig:
    """Read and structurally check a JSON config file.

    Raises
    ------
    ConfigError
        On missing files, JSON syntax errors, unknown keys, or parameter
        values outside their domains.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    prob = raw.get("problem", "benchmark")
    overrides: dict = {}
    if isinstance(prob, str):
        name = prob
    elif isinstance(prob, dict):
        name = prob.get("name")
        if not isinstance(name, str):
            raise ConfigError("inline problem definition needs a 'name' string")
        overrides = prob.get("overrides", {})
        if not isinstance(overrides, dict):
            raise ConfigError("'overrides' must be an object")
        bad = set(prob) - {"name", "overrides"}
        if bad:
            raise ConfigError(f"unknown problem keys: {sorted(bad)}")
        bad = set(overrides) - _OVERRIDE_KEYS
        if bad:
            raise ConfigError(f"unknown override keys: {sorted(bad)}")
    else:
        raise ConfigError("'problem' must be a name or an object")

    params_raw = raw.get("params", {})
    if not isinstance(params_raw, dict):
        raise ConfigError("'params' must be an object")
    if "K" not in params_raw:
        raise ConfigError("'params' must set the iteration count K")
    try:
        params = AlgoParams(**params_raw)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad params: {err}") from err

    checkpoints = raw.get("checkpoints")
    if checkpoints is not None:
        try:
            checkpoints = tuple(int(k) for k in checkpoints)
        except (TypeError, ValueError) as err:
            raise ConfigError("checkpoints must be a list of integers") from err
    violation_grid = raw.get("violation_grid", 10001)
    if not isinstance(violation_grid, int) or violation_grid < 2:
        raise ConfigError("violation_grid must be an integer >= 2")
    x0 = raw.get("x0")
    if x0 is not None:
        try:
            x0 = tuple(float(v) for v in x0)
        except (TypeError, ValueError) as err:
            raise ConfigError("x0 must be a list of numbers") from err
    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output must be a path string")
    fmt = raw.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be 'csv' or 'json'")
    return RunConfig(
        problem_name=name,
        overrides=overrides,
        params=params,
        checkpoints=checkpoints,
        violation_grid=violation_grid,
        x0=x0,
        output=output,
        fmt=fmt,
    )


def build_problem(cfg: RunConfig) -> SipProblem:
    """Instantiate the configured catalog problem with overrides applied.

    Raises
    ------
    ConfigError
        For an unknown catalog name.
    ProblemBuildError
        When an override is structurally invalid (for example a box with
        ``lower > upper``); the message names the offending field.
    """
    entries = catalog()
    if cfg.problem_name not in entries:
        raise ConfigError(
            f"unknown problem {cfg.problem_name!r}; "
            f"catalog: {sorted(entries)}"
        )
    problem = entries[cfg.problem_name]()
    changes: dict = {}
    for key, value in cfg.overrides.items():
        try:
            if key in ("x_box", "xi_box"):
                changes[key] = BoxSet(value["lower"], value["upper"])
            elif key == "slater_point":
                changes[key] = np.asarray(value, dtype=float)
            else:
                changes[key] = float(value)
        except (KeyError, TypeError, ValueError) as err:
            raise ProblemBuildError(f"override {key}: {err}") from err
    if changes:
        try:
            problem = dataclasses.replace(problem, **changes)
        except ValueError as err:
            raise ProblemBuildError(str(err)) from err
    return problem


def _fmt(value: float) -> str:
    """12-significant-digit formatting for report numbers."""
    return f"{value:.12g}"


def report_to_csv(report: SolveReport) -> str:
    """Render the checkpoint table in the pinned CSV layout."""
    lines = [CSV_HEADER]
    for row in report.checkpoints:
        lines.append(
            ",".join(
                (
                    str(row.k),
                    _fmt(row.f_xbar),
                    _fmt(row.violation_xbar),
                    _fmt(row.f_xlast),
                    _fmt(row.wall_time_s),
                )
            )
        )
    return "\n".join(lines) + "\n"


def report_to_json(report: SolveReport) -> str:
    """Full report as JSON (non-finite floats use JSON Infinity literals)."""
    return json.dumps(report.to_dict(), indent=2) + "\n"


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        out = Path(path)
        if out.parent != Path("."):
            out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def cmd_solve(
    cfg: RunConfig, seed: int | None = None, out: str | None = None
) -> int:
    """Run the solver for a config; write the report; return an exit code."""
    try:
        problem = build_problem(cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ProblemBuildError as err:
        print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    bad = validate(problem)
    if bad:
        for msg in bad:
            print(f"validation error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION

    params = cfg.params if seed is None else dataclasses.replace(
        cfg.params, seed=seed
    )
    out_path = out if out is not None else cfg.output
    try:
        report = run(
            problem,
            params,
            checkpoints=cfg.checkpoints,
            x0=cfg.x0,
            violation_grid=cfg.violation_grid,
        )
    except NumericalAbort as err:
        print(
            f"numerical abort at iteration {err.iteration}: {err}",
            file=sys.stderr,
        )
        if err.report is not None and out_path is not None:
            text = (
                report_to_csv(err.report)
                if cfg.fmt == "csv"
                else report_to_json(err.report)
            )
            _write_output(text, out_path)
        return EXIT_NUMERICAL
    text = report_to_csv(report) if cfg.fmt == "csv" else report_to_json(report)
    _write_output(text, out_path)
    if out_path is not None:
        print(
            f"{problem.name}: K={params.K} f(x_bar)={report.f_bar:.6g} "
            f"violation={report.violation_bar:.6g} -> {out_path}"
        )
    return EXIT_OK


def _check_constants(c, K: int) -> tuple[bool, str]:
    rho0 = c.m_u * c.vol_xi
    checks = [
        ("alpha > 0", c.alpha > 0.0),
        ("rho_bar >= rho0", c.rho_bar >= rho0),
        ("ratio_r in (0, 1]", 0.0 < c.ratio_r <= 1.0),
        ("kappa_bar in (0, 1]", 0.0 < c.kappa_bar <= 1.0),
        ("l_exp in [1/2, 1)", 0.5 <= c.l_exp < 1.0),
        ("gamma > 0", c.gamma > 0.0),
        ("density cap > 1", c.log_density_cap > 0.0),
        ("h_max >= rho0", c.h_max >= rho0),
        ("c_max >= rho0", c.c_max >= rho0),
        (
            "mu*gamma identity",
            abs(
                c.mu * c.gamma * np.sqrt(K) / (2.0 * (c.c_max + c.d_x_sq)) - 1.0
            )
            <= 1e-12,
        ),
    ]
    bad = [name for name, ok in checks if not ok]
    return (not bad, "; ".join(bad) if bad else "all invariants hold")


def _check_divergences(seed: int = 0, trials: int = 200) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 33))
        lam = rng.random(n) * rng.uniform(0.1, 3.0)
        gam = rng.random(n) * rng.uniform(0.1, 3.0) + 1e-3
        b = b_divergence(lam, gam)
        if b < 0.0:
            return False, "b_divergence went negative"
        rho, rho_p = lam.sum(), gam.sum()
        if rho > 0.0:
            split = rho * kl_divergence(lam / rho, gam / rho_p) + h_func(rho, rho_p)
            worst = max(worst, abs(b - split) / max(1.0, abs(b)))
        pinsker = b - np.abs(lam - gam).sum() ** 2 / (2.0 * max(rho, rho_p))
        if pinsker < -1e-10:
            return False, f"mass-weighted Pinsker violated by {pinsker:.3g}"
    if worst > 1e-10:
        return False, f"mass/shape split off by {worst:.3g}"
    return True, f"{trials} random pairs"


def _check_dual_optimality(problem, c, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    grid = uniform_density_grid(problem.xi_box, 513, level=c.m_u)
    worst = 0.0
    for _ in range(3):
        x = problem.x_box.lower + rng.random(problem.dim_x) * problem.x_box.widths
        lam = grid.with_values(
            c.m_u * np.exp(0.3 * rng.standard_normal(grid.values.size))
        )
        star = exact_dual_update_grid(lam, x, problem, c)
        base = brute_force_dual_objective(star, lam, x, problem, c)
        for _ in range(20):
            cand = star.with_values(
                star.values * np.exp(0.2 * rng.standard_normal(star.values.size))
            )
            if cand.mass > c.rho_bar:
                cand = cand.with_values(cand.values * (c.rho_bar / cand.mass))
            margin = brute_force_dual_objective(cand, lam, x, problem, c) - base
            worst = min(worst, margin)
    if worst < -1e-8:
        return False, f"a perturbation improved the prox objective by {-worst:.3g}"
    return True, f"worst margin {worst:.3g}"


def _softmax_objective(grid, g_vals, density, kappa: float, vol: float) -> float:
    """``E_phi[g] - kappa * D(phi, uniform)`` for a probability density."""
    pos = density > 0.0
    ent = np.zeros_like(density)
    ent[pos] = density[pos] * np.log(density[pos] * vol)
    return grid.integrate(density * g_vals) - kappa * grid.integrate(ent)


def _check_softmax(problem, c, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    grid = uniform_density_grid(problem.xi_box, 513)
    log_qw = np.log(grid.quad_weights)
    worst_gap, worst_margin = 0.0, 0.0
    for _ in range(3):
        x = problem.x_box.lower + rng.random(problem.dim_x) * problem.x_box.widths
        g_vals = np.asarray(problem.g(x, grid.nodes), dtype=float)
        for kappa in (1.0, 0.1, 0.01):
            phi = phi_kappa_softmax(x, kappa, problem, grid)
            val = _softmax_objective(grid, g_vals, phi.values, kappa, c.vol_xi)
            closed = kappa * logsumexp(g_vals / kappa + log_qw) - kappa * np.log(
                c.vol_xi
            )
            worst_gap = max(worst_gap, abs(val - closed))
            for _ in range(20):
                u = rng.random(grid.values.size) + 1e-12
                cand = u / grid.integrate(u)
                other = _softmax_objective(grid, g_vals, cand, kappa, c.vol_xi)
                worst_margin = min(worst_margin, val - other)
    if worst_gap > 1e-8:
        return False, f"softmax value identity off by {worst_gap:.3g}"
    if worst_margin < -1e-8:
        return False, f"a candidate beat the softmax by {-worst_margin:.3g}"
    return True, f"identity within {worst_gap:.3g}, dominance holds"


def _check_reg_gap(problem, params, c, seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    grid = uniform_density_grid(problem.xi_box, 513)
    for _ in range(5):
        x = problem.x_box.lower + rng.random(problem.dim_x) * problem.x_box.widths
        gap, ok = regularization_gap_check(x, params.epsilon, problem, c, grid)
        if not ok:
            return False, f"gap {gap:.3g} outside [0, {params.epsilon}]"
    return True, "5 random points"


def cmd_check(cfg: RunConfig) -> int:
    """Run the property checks for a config; return 0 iff all pass."""
    try:
        problem = build_problem(cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ProblemBuildError as err:
        print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    bad = validate(problem)
    if bad:
        for msg in bad:
            print(f"validation error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    # a dense margin grid is only affordable for low index dimensions
    alpha_grid = 2001 if problem.dim_xi <= 2 else 101
    c = derive_constants(problem, cfg.params, alpha_grid=alpha_grid)

    results = [
        ("constants-invariants", *_check_constants(c, cfg.params.K)),
        ("divergence-properties", *_check_divergences()),
    ]
    if problem.dim_xi <= 2:
        results.append(("dual-update-optimality", *_check_dual_optimality(problem, c)))
        results.append(("softmax-optimality", *_check_softmax(problem, c)))
        results.append(("regularization-gap", *_check_reg_gap(problem, cfg.params, c)))
    else:
        print("SKIP quadrature checks (index dimension > 2)")
    all_ok = True
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        all_ok = all_ok and ok
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


def cmd_constants(cfg: RunConfig) -> int:
    """Print the derived constants for a config as JSON."""
    try:
        problem = build_problem(cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ProblemBuildError as err:
        print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    bad = validate(problem)
    if bad:
        for msg in bad:
            print(f"validation error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        c = derive_constants(problem, cfg.params)
    except ValueError as err:
        print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    print(json.dumps(c.to_dict(), indent=2))
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sipsolve",
        description="Primal-dual solver for box-constrained semi-infinite programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_solve = sub.add_parser("solve", help="run the solver and write a report")
    p_solve.add_argument("--config", required=True, help="JSON config path")
    p_solve.add_argument("--seed", type=int, default=None, help="override the seed")
    p_solve.add_argument("--out", default=None, help="override the output path")
    p_check = sub.add_parser("check", help="run property checks for a config")
    p_check.add_argument("--config", required=True, help="JSON config path")
    p_const = sub.add_parser("constants", help="print derived constants as JSON")
    p_const.add_argument("--config", required=True, help="JSON config path")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "solve":
        return cmd_solve(cfg, seed=args.seed, out=args.out)
    if args.command == "check":
        return cmd_check(cfg)
    return cmd_constants(cfg)


if __name__ == "__main__":
    sys.exit(main())
