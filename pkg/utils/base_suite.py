"""
Abstract base class for verification suites.

A suite checks one part of the pipeline against an independent oracle and
reports whether it passed, with a short human-readable detail line and the
numbers behind it.

Author: EchoViews Contributors
License: MIT
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional


@dataclass
class SuiteOutcome:
    """
    Attributes:
        passed: Whether every check of the suite held
        detail: One-line summary, e.g. "50/50 pairs, min IoU 0.981"
        metrics: Numbers worth exporting (minimum IoU, worst error, ...)
    """

    passed: bool
    detail: str
    metrics: dict[str, float] = field(default_factory=dict)


class VerificationSuite(ABC):
    """
    Abstract base class for verification suites.

    Example Usage:
        class AlwaysGreen(VerificationSuite):
            @property
            def name(self) -> str:
                return "Always green"

            @property
            def description(self) -> str:
                return "Passes unconditionally"

            def run(self) -> SuiteOutcome:
                return SuiteOutcome(passed=True, detail="ok")
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Display name of the suite."""

    @property
    @abstractmethod
    def description(self) -> str:
        """One-line description of what is checked against what."""

    @property
    def budget_seconds(self) -> Optional[float]:
        """Wall-clock budget; exceeding it fails the suite. None means unlimited."""
        return None

    @abstractmethod
    def run(self) -> SuiteOutcome:
        """
        Execute all checks.

        Returns:
            SuiteOutcome; raising counts as a failure with the error recorded
        """

    def setup(self) -> None:
        """Prepare shared inputs before `run`; not timed."""

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name='{self.name}')"

    def __str__(self) -> str:
        return self.name
