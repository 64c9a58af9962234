import csv
import json
import math

import numpy as np
import pytest

from quadfun import EstimateReport, density_to_dict, make_trig_density, sample
from quadfun.cli import main

COSINE = make_trig_density({1: 1 / math.sqrt(2)})


def write_samples(path, points):
    with open(path, "w") as fh:
        for row in np.atleast_2d(points):
            fh.write(",".join(f"{v:.17g}" for v in np.atleast_1d(row)) + "\n")


@pytest.fixture
def sample_files(tmp_path):
    xs = sample(COSINE, 400, seed=1).points
    ys = sample(COSINE, 400, seed=2).points
    x_path, y_path = tmp_path / "x.csv", tmp_path / "y.csv"
    write_samples(x_path, xs)
    write_samples(y_path, ys)
    return str(x_path), str(y_path)


class TestHelp:
    @pytest.mark.parametrize(
        "cmd", ["estimate", "rates", "bounds", "solve-zeta", "lowerbound", "experiment"]
    )
    def test_subcommand_help_exits_zero(self, cmd, capsys):
        assert main([cmd, "--help"]) == 0
        out = capsys.readouterr().out
        assert "usage" in out.lower()

    def test_top_level_help(self, capsys):
        assert main(["--help"]) == 0

    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["rates", "--a", "sobolev:1", "--b", "sobolev:2", "-D", "1", "--bogus"]) == 1

    def test_missing_subcommand(self):
        assert main([]) == 1


class TestRates:
    def test_nonparametric_cell(self, capsys):
        code = main(["rates", "--a", "sobolev:1", "--b", "sobolev:1.5", "-D", "1"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["exponent"] == pytest.approx(-4 / 7, abs=1e-6)
        assert payload["regime"] == "nonparametric"

    def test_inconsistent_cell_exits_3(self, capsys):
        code = main(["rates", "--a", "exponential:1", "--b", "sobolev:2", "-D", "1"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 3
        assert payload["exponent"] == "INF"


class TestEstimate:
    def test_inner_roundtrip(self, sample_files, capsys):
        x_path, y_path = sample_files
        code = main(
            [
                "estimate", "--kind", "inner", "--weights", "constant@exclude_origin",
                "--zeta", "2", "--samples-x", x_path, "--samples-y", y_path,
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        report = EstimateReport.from_dict(payload)
        assert report.kind == "inner_product"
        assert report.truncation == 2 and report.term_count == 4
        assert abs(report.value - 0.5) < 0.3

    def test_norm_requires_two_samples(self, tmp_path, capsys):
        path = tmp_path / "one.csv"
        path.write_text("0.4\n")
        code = main(
            [
                "estimate", "--kind", "norm", "--weights", "constant@exclude_origin",
                "--zeta", "1", "--samples-x", str(path),
            ]
        )
        assert code == 2
        assert "need n >= 2 for sample splitting" in capsys.readouterr().err

    def test_malformed_csv_reports_line(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("0.4\n1.7\n")
        code = main(
            [
                "estimate", "--kind", "norm", "--weights", "constant@exclude_origin",
                "--zeta", "1", "--samples-x", str(path),
            ]
        )
        assert code == 2
        assert "line 2" in capsys.readouterr().err

    def test_lecam_zeta_rule(self, sample_files, capsys):
        x_path, _ = sample_files
        code = main(
            [
                "estimate", "--kind", "norm", "--weights", "constant@exclude_origin",
                "--zeta", "lecam", "--b-weights", "sobolev:1@exclude_origin",
                "--samples-x", x_path,
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["truncation"] >= 1

    def test_missing_y_for_inner(self, sample_files, capsys):
        x_path, _ = sample_files
        code = main(
            [
                "estimate", "--kind", "inner", "--weights", "constant@exclude_origin",
                "--zeta", "1", "--samples-x", x_path,
            ]
        )
        assert code == 2


class TestBoundsAndSolve:
    def test_bounds_values(self, capsys):
        code = main(
            [
                "bounds", "--a", "constant@all", "--b", "constant@all",
                "--zeta", "8", "-D", "1", "-n", "10",
                "--norm2-p", "1", "--norm2-q", "1", "--normb-p", "1",
                "--normb-q", "1", "--norma-p", "1", "--norma-q", "1",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["bias_bound"] == pytest.approx(1.0)
        # ball has 17 members here (vs the 16-member worked example)
        assert payload["variance_bound"] == pytest.approx(
            2 * 17 / 100 + 2 * math.sqrt(17) * 17 ** (1 / 4) / 10 * 0 + 0.54, abs=0.5
        )
        assert payload["mse_bound"] > payload["variance_bound"]

    def test_inconsistent_bounds_exit_3(self, capsys):
        code = main(
            [
                "bounds", "--a", "exponential:1@all", "--b", "sobolev:1@all",
                "--zeta", "2", "-D", "1", "-n", "10",
                "--norm2-p", "1", "--norm2-q", "1", "--normb-p", "1",
                "--normb-q", "1", "--norma-p", "1", "--norma-q", "1",
            ]
        )
        assert code == 3
        payload = json.loads(capsys.readouterr().out)
        assert payload["bias_bound"] == "INF"

    def test_solve_zeta(self, capsys):
        code = main(
            ["solve-zeta", "--b", "sobolev:1@exclude_origin", "-D", "1", "-n", "1000"]
        )
        assert code == 0
        assert json.loads(capsys.readouterr().out) == {"zeta": 19}


class TestLowerbound:
    def test_sweep_csv(self, capsys):
        code = main(
            [
                "lowerbound", "--a", "constant@exclude_origin",
                "--b", "sobolev:1@exclude_origin", "-D", "1", "-n", "100",
                "--zeta-max", "6",
            ]
        )
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "zeta,valid,gap,tv_bound,attempts,failures"
        parsed = {int(row.split(",")[0]): row.split(",")[1] for row in lines[1:]}
        assert parsed == {1: "false", 2: "false", 3: "false", 4: "false", 5: "true", 6: "true"}


class TestExperiment:
    def make_config(self, tmp_path, **overrides):
        cfg = {
            "density_p": density_to_dict(COSINE),
            "density_q": None,
            "a": "constant@exclude_origin",
            "b": None,
            "n_grid": [100, 200],
            "replications": 10,
            "zeta_rule": "fixed",
            "fixed_zeta": 1,
            "base_seed": 9,
            "estimand_kind": "inner_product",
            "output_csv": str(tmp_path / "study.csv"),
            "output_sidecar": str(tmp_path / "study.json"),
        }
        cfg.update(overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg))
        return str(path), cfg

    def test_end_to_end(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("QUADFUN_THREADS", "2")
        config_path, cfg = self.make_config(tmp_path)
        assert main(["experiment", "--config", config_path]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["rows"] == 2
        with open(cfg["output_csv"], newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 3
        sidecar = json.loads(open(cfg["output_sidecar"]).read())
        assert sidecar["config"]["replications"] == 10

    def test_deterministic_output_files(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("QUADFUN_THREADS", "1")
        config_path, cfg = self.make_config(tmp_path)
        main(["experiment", "--config", config_path])
        first = open(cfg["output_csv"]).read()
        monkeypatch.setenv("QUADFUN_THREADS", "4")
        main(["experiment", "--config", config_path])
        second = open(cfg["output_csv"]).read()
        capsys.readouterr()
        assert first == second

    def test_bad_config_exits_2(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["experiment", "--config", str(path)]) == 2
        path.write_text(json.dumps({"a": "constant"}))
        assert main(["experiment", "--config", str(path)]) == 2
        capsys.readouterr()
