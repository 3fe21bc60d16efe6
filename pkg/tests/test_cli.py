import json

import numpy as np
import pytest
from click.testing import CliRunner

from pvarstat.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def write_json(path, data):
    path.write_text(json.dumps(data))


def linproc_config(n=8, seed=1, **over):
    cfg = {
        "mode": "linproc",
        "n": n,
        "seed": seed,
        "filter": {"family": "geometric", "phi": 0.5, "scale": 1.0},
        "innovations": {"distribution": "normal", "sigma_eta": 1.0},
    }
    cfg.update(over)
    return cfg


class TestSimulate:
    def test_linproc_deterministic(self, runner, tmp_path):
        cfg = tmp_path / "sim.json"
        write_json(cfg, linproc_config())
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            res = runner.invoke(main, ["simulate", "--config", str(cfg), "--out", str(out)])
            assert res.exit_code == 0, res.output
        assert out1.read_bytes() == out2.read_bytes()
        lines = out1.read_text().splitlines()
        assert lines[0] == "value"
        assert len(lines) == 9

    def test_cpm_null_equals_linproc(self, runner, tmp_path):
        base, cpm = tmp_path / "b.json", tmp_path / "c.json"
        write_json(base, linproc_config(seed=5))
        write_json(cpm, linproc_config(seed=5, mode="cpm",
                                       model={"tau": [0, 1], "beta": [0]}))
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert runner.invoke(main, ["simulate", "--config", str(base), "--out", str(out1)]).exit_code == 0
        assert runner.invoke(main, ["simulate", "--config", str(cpm), "--out", str(out2)]).exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_regression_zero_beta_equals_linproc(self, runner, tmp_path):
        base, reg = tmp_path / "b.json", tmp_path / "r.json"
        write_json(base, linproc_config(seed=6))
        write_json(reg, linproc_config(seed=6, mode="regression", beta=0.0,
                                       f={"kind": "power", "a": 1}))
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert runner.invoke(main, ["simulate", "--config", str(base), "--out", str(out1)]).exit_code == 0
        assert runner.invoke(main, ["simulate", "--config", str(reg), "--out", str(out2)]).exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_unknown_key_exit_2(self, runner, tmp_path):
        cfg = tmp_path / "bad.json"
        write_json(cfg, linproc_config(bogus=1))
        res = runner.invoke(main, ["simulate", "--config", str(cfg), "--out", str(tmp_path / "x.csv")])
        assert res.exit_code == 2
        assert "/bogus" in res.output

    def test_missing_config_exit_2(self, runner, tmp_path):
        res = runner.invoke(main, ["simulate", "--config", str(tmp_path / "nope.json"),
                                   "--out", str(tmp_path / "x.csv")])
        assert res.exit_code == 2


class TestPvarCommand:
    def test_tent_path(self, runner, tmp_path):
        series = tmp_path / "s.csv"
        series.write_text("value\n0\n1\n0\n")
        res = runner.invoke(main, ["pvar", "--input", str(series), "--p", "2", "--cumulative"])
        assert res.exit_code == 0
        payload = json.loads(res.output)
        assert payload["value"] == 2.0

    def test_raw_mode_accumulates(self, runner, tmp_path):
        series = tmp_path / "s.csv"
        series.write_text("value\n1\n1\n1\n")
        res = runner.invoke(main, ["pvar", "--input", str(series), "--p", "2", "--raw",
                                   "--emit-partition"])
        payload = json.loads(res.output)
        assert payload["value"] == 9.0
        assert payload["partition"] == [0, 3]

    def test_origin_flag_required(self, runner, tmp_path):
        series = tmp_path / "s.csv"
        series.write_text("value\n1\n")
        res = runner.invoke(main, ["pvar", "--input", str(series), "--p", "2"])
        assert res.exit_code == 2

    def test_bad_header_exit_2(self, runner, tmp_path):
        series = tmp_path / "s.csv"
        series.write_text("x\n1\n")
        res = runner.invoke(main, ["pvar", "--input", str(series), "--p", "2", "--raw"])
        assert res.exit_code == 2

    def test_invalid_exponent_exit_2(self, runner, tmp_path):
        series = tmp_path / "s.csv"
        series.write_text("value\n1\n2\n")
        res = runner.invoke(main, ["pvar", "--input", str(series), "--p", "0.5", "--raw"])
        assert res.exit_code == 2


class TestCalibrateAndTest:
    def test_roundtrip(self, runner, tmp_path):
        cal = tmp_path / "cal.json"
        write_json(cal, {"p": 3.0, "grid": 256, "reps": 200, "seed": 7,
                         "levels": [0.9, 0.95]})
        table = tmp_path / "table.json"
        res = runner.invoke(main, ["calibrate", "--config", str(cal), "--out", str(table)])
        assert res.exit_code == 0, res.output
        data = json.loads(table.read_text())
        assert data["p"] == 3.0 and data["grid"] == 256
        assert set(data["quantiles"]) == {"0.9", "0.95"}

        sim = tmp_path / "sim.json"
        write_json(sim, linproc_config(n=512, seed=3))
        series = tmp_path / "series.csv"
        assert runner.invoke(main, ["simulate", "--config", str(sim), "--out", str(series)]).exit_code == 0
        report_path = tmp_path / "report.json"
        res = runner.invoke(main, ["cptest", "--input", str(series), "--p", "3",
                                   "--alpha", "0.05", "--cv", str(table),
                                   "--sigma-eta", "1.0", "--a-psi", "2.0",
                                   "--out", str(report_path)])
        assert res.exit_code == 0, res.output
        report = json.loads(report_path.read_text())
        assert report["reject"] == (report["normalized"] > report["critical_value"])
        assert 0.0 <= report["p_value"] <= 1.0
        assert report["n"] == 512

    def test_estimate_lrv_flag(self, runner, tmp_path):
        cal = tmp_path / "cal.json"
        write_json(cal, {"p": 3.0, "grid": 256, "reps": 150, "seed": 8})
        table = tmp_path / "table.json"
        assert runner.invoke(main, ["calibrate", "--config", str(cal), "--out", str(table)]).exit_code == 0
        sim = tmp_path / "sim.json"
        write_json(sim, linproc_config(n=2048, seed=4))
        series = tmp_path / "series.csv"
        assert runner.invoke(main, ["simulate", "--config", str(sim), "--out", str(series)]).exit_code == 0
        res = runner.invoke(main, ["cptest", "--input", str(series), "--p", "3",
                                   "--alpha", "0.05", "--cv", str(table),
                                   "--estimate-lrv", "--bandwidth", "30"])
        assert res.exit_code == 0, res.output
        report = json.loads(res.output)
        # geometric(0.5) noise: sqrt(lrv) should be near sigma * A = 2
        assert 1.2 < report["scale"] < 2.8

    def test_table_mismatch_exit_2(self, runner, tmp_path):
        cal = tmp_path / "cal.json"
        write_json(cal, {"p": 3.0, "grid": 64, "reps": 50, "seed": 7})
        table = tmp_path / "table.json"
        assert runner.invoke(main, ["calibrate", "--config", str(cal), "--out", str(table)]).exit_code == 0
        series = tmp_path / "s.csv"
        series.write_text("value\n1\n-1\n2\n")
        res = runner.invoke(main, ["cptest", "--input", str(series), "--p", "2.5",
                                   "--alpha", "0.05", "--cv", str(table),
                                   "--sigma-eta", "1.0", "--a-psi", "1.0"])
        assert res.exit_code == 2


class TestStudies:
    def make_study(self, tmp_path, reps=20):
        cal = tmp_path / "cal.json"
        write_json(cal, {"p": 3.0, "grid": 128, "reps": 100, "seed": 7})
        table = tmp_path / "table.json"
        runner = CliRunner()
        assert runner.invoke(main, ["calibrate", "--config", str(cal), "--out", str(table)]).exit_code == 0
        study = tmp_path / "study.json"
        write_json(study, {
            "p": 3.0, "alpha": 0.05, "seed": 11, "cv_table": "table.json",
            "filter": {"family": "finite", "coeffs": [1.0]},
            "innovations": {"distribution": "normal", "sigma_eta": 1.0},
            "n": [64], "reps": reps,
            "scenarios": [{"id": "h0", "tau": [0, 1], "beta": [0]},
                          {"id": "jump", "tau": [0, 0.5, 1], "beta": [0, 2]}],
        })
        return study

    def test_cpstudy_output_schema(self, runner, tmp_path):
        study = self.make_study(tmp_path)
        out = tmp_path / "rows.csv"
        res = runner.invoke(main, ["cpstudy", "--config", str(study), "--out", str(out)])
        assert res.exit_code == 0, res.output
        lines = out.read_text().splitlines()
        assert lines[0] == "scenario_id,n,drift,rejections,reps,rate"
        assert len(lines) == 3
        assert lines[1].startswith("h0,64,0.0,")

    def test_cpstudy_worker_invariance(self, runner, tmp_path):
        study = self.make_study(tmp_path)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert runner.invoke(main, ["cpstudy", "--config", str(study), "--out", str(out1),
                                    "--workers", "1"]).exit_code == 0
        assert runner.invoke(main, ["cpstudy", "--config", str(study), "--out", str(out2),
                                    "--workers", "2"]).exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_regress_study(self, runner, tmp_path):
        cfg = tmp_path / "reg.json"
        write_json(cfg, {
            "beta": 1.0, "f": {"kind": "power", "a": 1},
            "filter": {"family": "geometric", "phi": 0.5, "scale": 1.0},
            "innovations": {"distribution": "normal", "sigma_eta": 1.0},
            "n": 128, "reps": 60, "seed": 3,
        })
        out = tmp_path / "sample.csv"
        summary = tmp_path / "summary.json"
        res = runner.invoke(main, ["regress-study", "--config", str(cfg), "--out", str(out),
                                   "--summary", str(summary)])
        assert res.exit_code == 0, res.output
        lines = out.read_text().splitlines()
        assert lines[0] == "value" and len(lines) == 61
        data = json.loads(summary.read_text())
        assert data["theoretical_variance"] == pytest.approx(12.0)
        assert "generator" in data and "version" in data

    def test_version_flag(self, runner):
        res = runner.invoke(main, ["--version"])
        assert res.exit_code == 0
        assert "pvarstat" in res.output and "Philox" in res.output
