"""
EchoViews - Verification suites.

Independent oracles for slicing, gradients and view recognition, with a
runner that times them against their budgets.
"""

from .runner import SuiteResult, VerificationRunner, VerificationSummary, default_suites
from .suites import GradientCheckSuite, SlicingOracleSuite, ViewRecoverySuite
from .timer import PrecisionTimer

__all__ = [
    "GradientCheckSuite",
    "PrecisionTimer",
    "SlicingOracleSuite",
    "SuiteResult",
    "VerificationRunner",
    "VerificationSummary",
    "ViewRecoverySuite",
    "default_suites",
]
