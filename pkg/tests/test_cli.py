"""The ``llcartan`` command line."""

import json

import pytest
from click.testing import CliRunner

from llcartan.cli import main


@pytest.fixture
def runner():
    return CliRunner()


class TestList:
    def test_text(self, runner):
        res = runner.invoke(main, ["list"])
        assert res.exit_code == 0
        assert "model-cone" in res.output and "anchors:" in res.output

    def test_json(self, runner):
        res = runner.invoke(main, ["list", "--format", "json"])
        data = json.loads(res.output)
        assert len(data) >= 8
        assert res.output == runner.invoke(main, ["list", "--format", "json"]).output


class TestRun:
    def test_json_report(self, runner):
        res = runner.invoke(main, ["run", "kossowski-surface", "--samples", "3", "--seed", "1"])
        assert res.exit_code == 0, res.output
        data = json.loads(res.output)
        assert data["scenario"] == "kossowski-surface"
        assert data["parameters"]["samples"] == 3 and data["parameters"]["seed"] == 1

    def test_failure_exit_code(self, runner):
        res = runner.invoke(main, ["run", "flat-null-hyperplane", "--tol", "1e-30", "--format", "text"])
        assert res.exit_code == 1
        assert "FAIL" in res.output

    @pytest.mark.parametrize(
        "args",
        [
            ["run", "nope"],
            ["run", "model-cone", "--c", "1"],
            ["run", "kossowski-surface", "--m", "3"],
            ["run", "model-cone", "--param", "novalue"],
            ["run", "model-cone", "--format", "xml"],
        ],
    )
    def test_usage_errors(self, runner, args):
        assert runner.invoke(main, args).exit_code == 2

    def test_param_flag(self, runner):
        res = runner.invoke(main, ["run", "kossowski-surface", "--samples", "2", "--param", "R=2.0"])
        assert res.exit_code == 0
        assert json.loads(res.output)["parameters"]["R"] == 2.0

    def test_out_file_and_csv(self, runner, tmp_path):
        out = tmp_path / "r.csv"
        res = runner.invoke(main, ["run", "recurrent-conformal", "--samples", "2", "--format", "csv", "--out", str(out)])
        assert res.exit_code == 0
        assert out.read_text().startswith("scenario,id,anchor,residual")

    def test_config_file_and_flag_precedence(self, runner, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"samples": 2, "seed": 9, "format": "json"}))
        res = runner.invoke(main, ["run", "recurrent-conformal", "--config", str(cfg), "--seed", "4"])
        assert res.exit_code == 0
        p = json.loads(res.output)["parameters"]
        assert p["samples"] == 2 and p["seed"] == 4

    def test_bad_config(self, runner, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("[1, 2]")
        assert runner.invoke(main, ["run", "model-cone", "--config", str(cfg)]).exit_code == 2
        cfg.write_text(json.dumps({"colour": "blue"}))
        assert runner.invoke(main, ["run", "model-cone", "--config", str(cfg)]).exit_code == 2

    def test_timing_flag(self, runner):
        res = runner.invoke(main, ["run", "kossowski-surface", "--samples", "2", "--timing"])
        assert json.loads(res.output)["wall_time_ms"] > 0


class TestVerifyAll:
    def test_text_summary(self, runner):
        res = runner.invoke(main, ["verify-all", "--samples", "2", "--format", "text"])
        assert res.exit_code == 0, res.output
        assert res.output.count("scenario ") >= 8
        assert "EXPECTED-FAIL" in res.output

    def test_jobs_do_not_change_bytes(self, runner):
        a = runner.invoke(main, ["verify-all", "--samples", "2", "--seed", "3"])
        b = runner.invoke(main, ["verify-all", "--samples", "2", "--seed", "3", "--jobs", "3"])
        assert a.exit_code == b.exit_code == 0
        assert a.output == b.output

    def test_pinned_dimension_is_kept(self, runner):
        res = runner.invoke(main, ["verify-all", "--samples", "2", "--m", "3"])
        data = json.loads(res.output)
        dims = {r["scenario"]: r["parameters"]["m"] for r in data["reports"]}
        assert dims["kossowski-surface"] == 2
        assert dims["einstein-scale-bundle"] == 4
        assert dims["model-cone"] == 3
