"""
Verification orchestrator.

Runs each suite under a timer, turning exceptions and budget overruns into
failed results so one broken suite never hides the others.

Author: EchoViews Contributors
License: MIT
"""

import logging
import time
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional, Sequence

from utils.base_suite import VerificationSuite
from verification.suites import GradientCheckSuite, SlicingOracleSuite, ViewRecoverySuite
from verification.timer import PrecisionTimer

logger = logging.getLogger(__name__)


@dataclass
class SuiteResult:
    """
    Result of one verification suite.

    Attributes:
        name: Suite name
        description: What the suite checks
        passed: Whether the suite passed within its budget
        detail: Summary line from the suite (empty on error)
        duration: Seconds spent in `run`
        error: Exception text or budget overrun, if any
        metrics: Numbers reported by the suite
    """

    name: str
    description: str
    passed: bool
    detail: str
    duration: float
    error: Optional[str] = None
    metrics: dict[str, float] = field(default_factory=dict)
    timestamp: datetime = field(default_factory=datetime.now)


@dataclass
class VerificationSummary:
    results: list[SuiteResult]
    total_duration: float
    timestamp: datetime = field(default_factory=datetime.now)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list[SuiteResult]:
        return [r for r in self.results if not r.passed]


def default_suites(seed: int = 0) -> list[VerificationSuite]:
    """The three oracle suites at their acceptance sizes."""
    return [
        SlicingOracleSuite(seed=seed),
        GradientCheckSuite(seed=seed),
        ViewRecoverySuite(seed=seed),
    ]


class VerificationRunner:
    """
    Runs verification suites and collects their results.

    Example:
        summary = VerificationRunner().run_all(default_suites(seed=0))
        for result in summary.failures():
            print(result.name, result.error or result.detail)
    """

    def __init__(self) -> None:
        self.timer = PrecisionTimer()

    def run_all(self, suites: Sequence[VerificationSuite]) -> VerificationSummary:
        start = time.perf_counter()
        results = []
        for i, suite in enumerate(suites, 1):
            logger.info("[%d/%d] %s: %s", i, len(suites), suite.name, suite.description)
            result = self.run_single(suite)
            status = "passed" if result.passed else "FAILED"
            logger.info("%s %s in %.1fs: %s", suite.name, status, result.duration, result.error or result.detail)
            results.append(result)
        return VerificationSummary(results=results, total_duration=time.perf_counter() - start)

    def run_single(self, suite: VerificationSuite) -> SuiteResult:
        try:
            suite.setup()
        except Exception as exc:
            return SuiteResult(
                suite.name, suite.description, False, "", 0.0, f"Setup failed: {exc}"
            )

        timing = self.timer.run(suite.run)
        if timing.error is not None:
            return SuiteResult(suite.name, suite.description, False, "", timing.elapsed, timing.error)

        outcome = timing.value
        error = None
        passed = outcome.passed
        if timing.over_budget(suite.budget_seconds):
            passed = False
            error = f"over budget: {timing.elapsed:.1f}s > {suite.budget_seconds:.0f}s"
        return SuiteResult(
            name=suite.name,
            description=suite.description,
            passed=passed,
            detail=outcome.detail,
            duration=timing.elapsed,
            error=error,
            metrics=outcome.metrics,
        )
