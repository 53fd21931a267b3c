"""
Tests for the verification runner.

Verifies that:
1. Passing suites are reported as passed with their detail and metrics
2. Exceptions in setup or run become failed results
3. Budget overruns fail a suite that otherwise passed
4. Summaries and their CSV export reflect every suite

Author: EchoViews Contributors
License: MIT
"""

import pytest
import sys
import time
from pathlib import Path

import pandas as pd

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from output.csv_exporter import CSVExporter
from utils.base_suite import SuiteOutcome, VerificationSuite
from verification.runner import VerificationRunner, default_suites
from verification.suites import GradientCheckSuite, SlicingOracleSuite, ViewRecoverySuite
from verification.timer import PrecisionTimer


class GreenSuite(VerificationSuite):
    @property
    def name(self) -> str:
        return "Green"

    @property
    def description(self) -> str:
        return "Always passes"

    def run(self) -> SuiteOutcome:
        return SuiteOutcome(True, "1/1 ok", {"score": 1.0})


class RedSuite(GreenSuite):
    @property
    def name(self) -> str:
        return "Red"

    def run(self) -> SuiteOutcome:
        return SuiteOutcome(False, "0/1 ok")


class CrashingSuite(GreenSuite):
    @property
    def name(self) -> str:
        return "Crashing"

    def run(self) -> SuiteOutcome:
        raise RuntimeError("boom")


class BrokenSetupSuite(GreenSuite):
    @property
    def name(self) -> str:
        return "Broken setup"

    def setup(self) -> None:
        raise FileNotFoundError("no phantoms")


class SlowSuite(GreenSuite):
    @property
    def name(self) -> str:
        return "Slow"

    @property
    def budget_seconds(self):
        return 0.001

    def run(self) -> SuiteOutcome:
        time.sleep(0.02)
        return super().run()


@pytest.fixture
def runner():
    return VerificationRunner()


class TestRunner:
    """Test single-suite execution."""

    def test_passing_suite(self, runner):
        result = runner.run_single(GreenSuite())
        assert result.passed
        assert result.detail == "1/1 ok"
        assert result.metrics == {"score": 1.0}
        assert result.error is None
        assert result.duration >= 0.0

    def test_failing_suite(self, runner):
        result = runner.run_single(RedSuite())
        assert not result.passed
        assert result.error is None

    def test_exception_in_run(self, runner):
        result = runner.run_single(CrashingSuite())
        assert not result.passed
        assert result.error == "RuntimeError: boom"

    def test_exception_in_setup(self, runner):
        result = runner.run_single(BrokenSetupSuite())
        assert not result.passed
        assert result.error.startswith("Setup failed")
        assert "no phantoms" in result.error

    def test_over_budget(self, runner):
        result = runner.run_single(SlowSuite())
        assert not result.passed
        assert "over budget" in result.error
        assert result.detail == "1/1 ok"


class TestSummary:
    """Test multi-suite summaries."""

    def test_all_passing(self, runner):
        summary = runner.run_all([GreenSuite(), GreenSuite()])
        assert summary.passed
        assert summary.failures() == []

    def test_one_failure_keeps_the_others(self, runner):
        summary = runner.run_all([CrashingSuite(), GreenSuite(), RedSuite()])
        assert not summary.passed
        assert [r.name for r in summary.results] == ["Crashing", "Green", "Red"]
        assert [r.name for r in summary.failures()] == ["Crashing", "Red"]

    def test_csv_export(self, runner, tmp_path):
        summary = runner.run_all([GreenSuite(), CrashingSuite()])
        path = CSVExporter(tmp_path).export_verification(summary)
        frame = pd.read_csv(path)
        assert frame["suite"].tolist() == ["Green", "Crashing"]
        assert frame["passed"].tolist() == [True, False]

    def test_default_suites(self):
        suites = default_suites(seed=3)
        assert [type(s) for s in suites] == [SlicingOracleSuite, GradientCheckSuite, ViewRecoverySuite]
        assert all(s.seed == 3 for s in suites)


class TestPrecisionTimer:
    def test_run_returns_value(self):
        timing = PrecisionTimer().run(lambda: 42)
        assert timing.value == 42
        assert timing.error is None
        assert not timing.over_budget(None)

    def test_run_catches(self):
        timing = PrecisionTimer().run(lambda: 1 / 0)
        assert timing.value is None
        assert timing.error.startswith("ZeroDivisionError")

    def test_time_single_call_propagates(self):
        with pytest.raises(ZeroDivisionError):
            PrecisionTimer().time_single_call(lambda: 1 / 0)

    def test_time_single_call(self):
        value, seconds = PrecisionTimer().time_single_call(lambda: "x")
        assert value == "x"
        assert seconds >= 0.0


@pytest.mark.slow
class TestAcceptanceSuites:
    """The oracle suites at their full sizes."""

    def test_gradient_checks(self):
        outcome = GradientCheckSuite().run()
        assert outcome.passed, outcome.detail

    def test_view_recovery(self):
        outcome = ViewRecoverySuite().run()
        assert outcome.passed, outcome.detail
