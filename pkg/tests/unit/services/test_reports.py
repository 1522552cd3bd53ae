"""
Tests for check reports, sweeps and publishing.
"""

import logging
import math

import pytest

from dysonlab.services.reports import CheckReport, margin, publish, report, standard_errors, sweep
from dysonlab.utils.helpers import get_run_stats


class TestCheckReport:
    def test_threshold_counts_standard_errors(self):
        result = CheckReport("x", -0.25, 0.1, 0.05)
        assert standard_errors() == 3.0
        assert result.threshold == pytest.approx(-0.25)
        assert result.passed

    def test_configured_standard_errors(self, testing_config):
        testing_config.set("harness.standard_errors", 1.0)
        assert not CheckReport("x", -0.25, 0.1, 0.05).passed

    def test_nan_residual_fails(self):
        assert not CheckReport("x", math.nan, 1.0).passed

    def test_closed_form_report(self):
        result = report("exact", 0, 1e-8, parameters={"k": 1})
        assert isinstance(result.residual, float)
        assert result.passed
        assert result.to_dict() == {
            "name": "exact",
            "label": "",
            "parameters": {"k": 1},
            "residual": 0.0,
            "tolerance": 1e-8,
            "statistical_error": 0.0,
            "pass": True,
        }


class TestSweep:
    def test_worst_case_by_margin(self):
        results = [
            report("case", 0.5, 0.0),
            report("case", -0.2, 0.1, 0.05),
            report("case", -0.15, 0.1),
        ]
        summary = sweep("all_cases", results, {"grid": 3})
        assert summary.name == "all_cases"
        assert summary.residual == -0.15
        assert summary.parameters["cases"] == 3
        assert summary.parameters["failures"] == 1
        assert summary.parameters["grid"] == 3
        assert not summary.passed
        assert margin(results[1]) == pytest.approx(0.05)

    def test_empty_sweep(self):
        with pytest.raises(ValueError):
            sweep("nothing", [])


class TestPublish:
    def test_records_outcomes(self, caplog):
        with caplog.at_level(logging.INFO, logger="dysonlab.services.reports"):
            publish(report("good", 1.0, 0.0))
            publish(report("bad", -1.0, 0.0, label="negative-control"))
        stats = get_run_stats().get_stats()
        assert stats["checks_run"] == 2
        assert stats["checks_failed"] == 1
        assert "✅ good" in caplog.text
        assert "❌ bad [negative-control]" in caplog.text
