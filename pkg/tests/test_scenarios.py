"""Scenario registry, verification reports and their serializations."""

import csv
import io
import json
import math

import numpy as np
import pytest

from llcartan.scenarios import (
    ANCHORS,
    CSV_HEADER,
    Check,
    ScenarioError,
    ScenarioKind,
    VerificationReport,
    emit_report,
    emit_reports,
    get_scenario,
    list_scenarios,
    report_to_dict,
    resolve_parameters,
    run_scenario,
)

NAMES = [e["name"] for e in list_scenarios()]


@pytest.fixture(scope="module")
def reports():
    return {name: run_scenario(name) for name in NAMES}


class TestRegistry:
    def test_at_least_eight_scenarios_covering_every_kind(self):
        assert len(NAMES) >= 8
        assert {get_scenario(n).kind for n in NAMES} == set(ScenarioKind)

    def test_catalog_is_stable(self):
        assert list_scenarios() == list_scenarios()
        assert json.dumps(list_scenarios(), sort_keys=True) == json.dumps(list_scenarios(), sort_keys=True)

    def test_catalog_entries(self):
        for e in list_scenarios():
            assert set(e) == {"name", "kind", "description", "parameters", "anchors"}
            assert all(a in ANCHORS for a in e["anchors"])
            assert {"m", "samples", "seed", "fd_step", "tol"} <= set(e["parameters"])

    def test_unknown_scenario(self):
        with pytest.raises(ScenarioError):
            get_scenario("does-not-exist")

    @pytest.mark.parametrize(
        "name, overrides",
        [
            ("model-cone", {"c": 1.0}),
            ("model-cone", {"m": 1}),
            ("model-cone", {"samples": 0}),
            ("model-cone", {"seed": -1}),
            ("model-cone", {"fd_step": 0.0}),
            ("model-cone", {"tol": -1.0}),
            ("model-cone", {"samples": 2.5}),
            ("model-cone", {"samples": "many"}),
            ("model-cone", {"m": None}),
            ("kossowski-surface", {"m": 3}),
            ("ambient-from-chart", {"family": "torus"}),
            ("ambient-from-chart", {"family": "einstein"}),
            ("ambient-from-chart", {"c": 3.0}),
            ("warped-umbilical", {"c": -2.5}),
        ],
    )
    def test_invalid_overrides(self, name, overrides):
        with pytest.raises(ScenarioError):
            resolve_parameters(get_scenario(name), overrides)

    def test_overrides_are_coerced(self):
        p = resolve_parameters(get_scenario("model-cone"), {"samples": "5", "seed": 3.0, "tol": None})
        assert p["samples"] == 5 and p["seed"] == 3 and p["tol"] is None


class TestChecks:
    def test_pass_semantics(self):
        assert Check("a", "flatness", 1e-9, 1e-8).passed
        assert not Check("a", "flatness", 1e-7, 1e-8).passed
        assert Check("a", "flatness", 1.0, 1e-8, expected_fail=True).passed
        assert not Check("a", "flatness", 0.0, 1e-8, expected_fail=True).passed
        assert not Check("a", "flatness", math.nan, 1e-8).passed
        assert Check("a", "flatness", math.nan, 1e-8, expected_fail=True).passed

    def test_every_default_scenario_passes(self, reports):
        for name, rep in reports.items():
            failed = [c.id for c in rep.checks if not c.passed]
            assert rep.passed, f"{name}: {failed}"

    def test_anchors_are_registered(self, reports):
        for rep in reports.values():
            assert rep.checks
            assert all(c.anchor in ANCHORS for c in rep.checks)
            ids = [c.id for c in rep.checks]
            assert len(ids) == len(set(ids))

    def test_expected_failures_are_present(self, reports):
        ef = {c.id for r in reports.values() for c in r.checks if c.expected_fail}
        assert "hyperplane/rank-test" in ef
        assert "hyperplane-model/shear-preserves-horizontal-fields" in ef
        assert "static/rank-test" in ef
        assert "light-cylinder/rank-test" in ef
        assert "cone/soldering-agreement" in ef  # from the scaled cone

    def test_tol_override_reaches_tunable_checks_only(self):
        rep = run_scenario("flat-null-hyperplane", {"tol": 1e-30})
        tunable = [c for c in rep.checks if c.tunable]
        assert tunable and all(c.tolerance == 1e-30 for c in tunable)
        rank = next(c for c in rep.checks if c.id == "hyperplane/rank-test")
        assert rank.tolerance == 8.0
        # exact-zero residuals still pass, everything else now fails
        assert not rep.passed

    def test_ricci_flat_value_flips_expected_failure(self):
        rep = run_scenario("ambient-from-chart", {"c": 0.5, "samples": 3})
        flat = next(c for c in rep.checks if c.id == "ambient/ricci-flat")
        assert not flat.expected_fail and flat.passed
        rep = run_scenario("ambient-from-chart", {"samples": 3})
        flat = next(c for c in rep.checks if c.id == "ambient/ricci-flat")
        assert flat.expected_fail and flat.passed and flat.residual > 1.0

    def test_static_family_reports_rank_failure(self):
        rep = run_scenario("ambient-from-chart", {"family": "static", "samples": 3})
        assert rep.passed
        rank = next(c for c in rep.checks if c.id == "ambient/pullback-rank-test")
        assert rank.expected_fail


class TestSerialization:
    def test_json_round_trip(self, reports):
        rep = reports["model-cone"]
        data = json.loads(emit_report(rep, "json"))
        assert data == json.loads(json.dumps(report_to_dict(rep)))
        assert data["all_pass"] is True
        assert data["wall_time_ms"] is None
        assert data["environment"]["seed"] == rep.parameters["seed"]

    def test_json_is_deterministic(self):
        a = emit_report(run_scenario("recurrent-conformal", {"seed": 5}))
        b = emit_report(run_scenario("recurrent-conformal", {"seed": 5}))
        assert a == b
        c = emit_report(run_scenario("recurrent-conformal", {"seed": 6}))
        assert a != c

    def test_non_finite_values_are_strings(self):
        rep = VerificationReport("x", "k", {}, [Check("a", "flatness", math.inf, 1.0), Check("b", "flatness", math.nan, 1.0)], {})
        data = json.loads(emit_report(rep))
        assert data["checks"][0]["residual"] == "inf"
        assert data["checks"][1]["residual"] == "nan"

    def test_floats_keep_full_precision(self):
        x = 0.1 + 0.2
        rep = VerificationReport("x", "k", {}, [Check("a", "flatness", x, 1.0)], {})
        assert json.loads(emit_report(rep))["checks"][0]["residual"] == x

    def test_csv_rows(self, reports):
        rows = list(csv.reader(io.StringIO(emit_reports(list(reports.values()), "csv").decode())))
        assert rows[0] == CSV_HEADER
        assert len(rows) - 1 == sum(len(r.checks) for r in reports.values())
        assert {r[5] for r in rows[1:]} == {"true"}
        assert "true" in {r[6] for r in rows[1:]}

    def test_text_marks_expected_failures(self, reports):
        txt = emit_report(reports["flat-null-hyperplane"], "text").decode()
        assert "EXPECTED-FAIL" in txt and "ALL PASS" in txt
        assert "UNEXPECTED-PASS" not in txt

    def test_text_marks_unexpected_pass(self):
        rep = VerificationReport("x", "k", {}, [Check("a", "flatness", 0.0, 1.0, expected_fail=True)], {})
        txt = emit_report(rep, "text").decode()
        assert "UNEXPECTED-PASS" in txt and "FAILURES" in txt

    def test_unknown_format(self, reports):
        with pytest.raises(ValueError):
            emit_reports([reports["model-cone"]], "xml")

    def test_timing_is_opt_in(self):
        assert run_scenario("kossowski-surface", {"samples": 2}, timing=True).wall_time_ms > 0
