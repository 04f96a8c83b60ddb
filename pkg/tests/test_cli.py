"""Config loading, report formats, and subcommand exit codes."""

import dataclasses
import json

import numpy as np
import pytest

import sipsolve.cli as cli
from sipsolve import AlgoParams, NumericalAbort, derive_constants, run
from sipsolve.cli import (
    CSV_HEADER,
    ConfigError,
    ProblemBuildError,
    build_problem,
    load_config,
)
from sipsolve.problem import catalog_test_problem


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


BASE = {"problem": "benchmark", "params": {"K": 50, "N": 50, "seed": 1}}


class TestLoadConfig:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "nope.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(path)

    def test_non_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="JSON object"):
            load_config(path)

    def test_unknown_top_key(self, tmp_path):
        cfg = write_config(tmp_path, {**BASE, "stepsize": 0.1})
        with pytest.raises(ConfigError, match="stepsize"):
            load_config(cfg)

    def test_missing_iteration_count(self, tmp_path):
        cfg = write_config(tmp_path, {"problem": "benchmark", "params": {"N": 10}})
        with pytest.raises(ConfigError, match="K"):
            load_config(cfg)

    def test_bad_param_value(self, tmp_path):
        cfg = write_config(
            tmp_path, {"problem": "benchmark", "params": {"K": 10, "epsilon": -1.0}}
        )
        with pytest.raises(ConfigError, match="bad params"):
            load_config(cfg)

    def test_unknown_override_key(self, tmp_path):
        cfg = write_config(
            tmp_path,
            {
                "problem": {"name": "benchmark", "overrides": {"L_bogus": 1.0}},
                "params": {"K": 10},
            },
        )
        with pytest.raises(ConfigError, match="L_bogus"):
            load_config(cfg)

    def test_bad_format(self, tmp_path):
        cfg = write_config(tmp_path, {**BASE, "format": "yaml"})
        with pytest.raises(ConfigError, match="format"):
            load_config(cfg)

    def test_bad_checkpoints(self, tmp_path):
        cfg = write_config(tmp_path, {**BASE, "checkpoints": ["soon"]})
        with pytest.raises(ConfigError, match="checkpoints"):
            load_config(cfg)

    def test_defaults(self, tmp_path):
        cfg = load_config(write_config(tmp_path, {"params": {"K": 10}}))
        assert cfg.problem_name == "benchmark"
        assert cfg.fmt == "csv"
        assert cfg.violation_grid == 10001
        assert cfg.checkpoints is None and cfg.x0 is None and cfg.output is None

    def test_inline_problem(self, tmp_path):
        cfg = load_config(
            write_config(
                tmp_path,
                {
                    "problem": {
                        "name": "benchmark",
                        "overrides": {"dual_lb": -1.0},
                    },
                    "params": {"K": 10},
                },
            )
        )
        assert cfg.problem_name == "benchmark"
        assert cfg.overrides == {"dual_lb": -1.0}


class TestBuildProblem:
    def test_unknown_problem_name(self, tmp_path):
        cfg = load_config(
            write_config(tmp_path, {"problem": "mystery", "params": {"K": 10}})
        )
        with pytest.raises(ConfigError, match="mystery"):
            build_problem(cfg)

    def test_override_applied(self, tmp_path):
        cfg = load_config(
            write_config(
                tmp_path,
                {
                    "problem": {"name": "benchmark", "overrides": {"dual_lb": -2.0}},
                    "params": {"K": 10},
                },
            )
        )
        assert build_problem(cfg).dual_lb == -2.0

    def test_invalid_box_override_names_field(self, tmp_path):
        cfg = load_config(
            write_config(
                tmp_path,
                {
                    "problem": {
                        "name": "benchmark",
                        "overrides": {"x_box": {"lower": [1.0, 0.0], "upper": [0.0, 1.0]}},
                    },
                    "params": {"K": 10},
                },
            )
        )
        with pytest.raises(ProblemBuildError, match="x_box"):
            build_problem(cfg)

    def test_missing_box_bound_names_field(self, tmp_path):
        cfg = load_config(
            write_config(
                tmp_path,
                {
                    "problem": {
                        "name": "benchmark",
                        "overrides": {"xi_box": {"lower": [0.0]}},
                    },
                    "params": {"K": 10},
                },
            )
        )
        with pytest.raises(ProblemBuildError, match="xi_box"):
            build_problem(cfg)


class TestSolveCommand:
    def test_missing_config_exits_2(self, tmp_path):
        code = cli.main(["solve", "--config", str(tmp_path / "nope.json")])
        assert code == cli.EXIT_CONFIG

    def test_infeasible_override_exits_3(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "problem": {
                    "name": "benchmark",
                    "overrides": {"slater_point": [5.0, 5.0]},
                },
                "params": {"K": 10},
            },
        )
        assert cli.main(["solve", "--config", cfg]) == cli.EXIT_VALIDATION
        assert "validation error" in capsys.readouterr().err

    def test_csv_output(self, tmp_path, capsys):
        out = tmp_path / "run" / "report.csv"
        cfg = write_config(
            tmp_path,
            {**BASE, "checkpoints": [10, 50], "output": str(out)},
        )
        assert cli.main(["solve", "--config", cfg]) == cli.EXIT_OK
        assert "benchmark" in capsys.readouterr().out
        lines = out.read_text().strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "10" and len(first) == 5
        float(first[1]), float(first[2]), float(first[3]), float(first[4])

    def test_stdout_when_no_output(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASE)
        assert cli.main(["solve", "--config", cfg]) == cli.EXIT_OK
        captured = capsys.readouterr().out
        assert captured.startswith(CSV_HEADER)

    def test_json_format_round_trip(self, tmp_path):
        out = tmp_path / "report.json"
        cfg = write_config(
            tmp_path, {**BASE, "format": "json", "output": str(out)}
        )
        assert cli.main(["solve", "--config", cfg]) == cli.EXIT_OK
        data = json.loads(out.read_text())
        assert data["problem_name"] == "benchmark"
        assert len(data["x_bar"]) == 2
        assert data["constants"]["rho_bar"] == pytest.approx(21.0)
        assert data["constants"]["density_cap"] == float("inf")
        assert len(data["checkpoints"]) == 1

    def test_seed_flag_changes_result(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        cfg = write_config(tmp_path, BASE)
        cli.main(["solve", "--config", cfg, "--out", str(out1)])
        cli.main(["solve", "--config", cfg, "--seed", "9", "--out", str(out2)])
        assert out1.read_text() != out2.read_text()

    def test_out_flag_overrides_config(self, tmp_path):
        cfg_out = tmp_path / "from_config.csv"
        flag_out = tmp_path / "from_flag.csv"
        cfg = write_config(tmp_path, {**BASE, "output": str(cfg_out)})
        cli.main(["solve", "--config", cfg, "--out", str(flag_out)])
        assert flag_out.exists() and not cfg_out.exists()

    def test_numerical_abort_exits_4(self, tmp_path, capsys, monkeypatch):
        problem = catalog_test_problem()
        params = AlgoParams(K=3, N=10)
        partial = run(problem, params)

        def explode(*args, **kwargs):
            raise NumericalAbort("synthetic overflow", iteration=3, report=partial)

        monkeypatch.setattr(cli, "run", explode)
        out = tmp_path / "partial.csv"
        cfg = write_config(tmp_path, {**BASE, "output": str(out)})
        assert cli.main(["solve", "--config", cfg]) == cli.EXIT_NUMERICAL
        assert "iteration 3" in capsys.readouterr().err
        assert out.read_text().startswith(CSV_HEADER)


class TestCheckCommand:
    def test_benchmark_passes(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"problem": "benchmark", "params": {"K": 200, "N": 50}}
        )
        assert cli.main(["check", "--config", cfg]) == cli.EXIT_OK
        out = capsys.readouterr().out
        lines = [ln for ln in out.strip().split("\n") if ln]
        assert len(lines) == 5
        assert all(ln.startswith("PASS") for ln in lines)

    def test_three_d_index_skips_quadrature(self, tmp_path, capsys, monkeypatch):
        # no catalog problem has a 3-d index box, so inject one
        import dataclasses as dc

        from sipsolve import BoxSet

        base = catalog_test_problem()
        p3 = dc.replace(
            base,
            name="flat-3d",
            xi_box=BoxSet([0.0] * 3, [1.0] * 3),
            g=lambda x, xi: np.full(xi.shape[0], -1.0),
            grad_x_g=lambda x, xi: np.zeros((xi.shape[0], 2)),
            slater_point=np.array([0.5, 0.1]),
            L_g_xi=1.0,
            G_max=1.0,
        )
        monkeypatch.setattr(cli, "build_problem", lambda cfg: p3)
        cfg = write_config(
            tmp_path, {"problem": "benchmark", "params": {"K": 100, "N": 20}}
        )
        assert cli.main(["check", "--config", cfg]) == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "SKIP" in out
        assert "PASS constants-invariants" in out
        assert "PASS divergence-properties" in out
        assert "dual-update-optimality" not in out

    def test_corrupted_constants_fail(self, tmp_path, capsys, monkeypatch):
        real = derive_constants(catalog_test_problem(), AlgoParams(K=200, N=50))
        broken = dataclasses.replace(real, kappa_bar=2.0)
        monkeypatch.setattr(
            cli, "derive_constants", lambda p, params, **kw: broken
        )
        cfg = write_config(
            tmp_path, {"problem": "benchmark", "params": {"K": 200, "N": 50}}
        )
        assert cli.main(["check", "--config", cfg]) == cli.EXIT_CHECK_FAILED
        out = capsys.readouterr().out
        assert "FAIL constants-invariants" in out
        assert "kappa_bar" in out


class TestConstantsCommand:
    def test_prints_parseable_json(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"problem": "benchmark", "params": {"K": 60000}}
        )
        assert cli.main(["constants", "--config", cfg]) == cli.EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["alpha"] == pytest.approx(0.2)
        assert data["rho_bar"] == pytest.approx(21.0)
        assert data["kappa_bar"] == pytest.approx((0.001 / 42.0) ** 2, rel=1e-12)
        assert data["gamma"] > 0.0 and data["mu"] > 0.0

    def test_rho0_conflict_exits_3(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"problem": "benchmark", "params": {"K": 100, "rho0": 1000.0}},
        )
        assert cli.main(["constants", "--config", cfg]) == cli.EXIT_VALIDATION
        assert "validation error" in capsys.readouterr().err
