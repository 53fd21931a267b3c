"""
Wall-clock timing for verification suites.

Author: EchoViews Contributors
License: MIT
"""

import time
from dataclasses import dataclass
from typing import Any, Callable, Optional


@dataclass
class TimingResult:
    """
    Attributes:
        value: Return value of the timed call (None on error)
        elapsed: Seconds spent in the call
        error: "<ExceptionType>: message" if the call raised
    """

    value: Any
    elapsed: float
    error: Optional[str] = None

    def over_budget(self, budget: Optional[float]) -> bool:
        return budget is not None and self.elapsed > budget


class PrecisionTimer:
    """
    Times single calls with time.perf_counter().

    Example:
        timer = PrecisionTimer()
        timing = timer.run(suite.run)
        print(f"{timing.elapsed:.2f}s")
    """

    def run(self, func: Callable[[], Any]) -> TimingResult:
        """Call `func`, catching any exception into the result."""
        start = time.perf_counter()
        try:
            value = func()
        except Exception as exc:
            return TimingResult(None, time.perf_counter() - start, f"{type(exc).__name__}: {exc}")
        return TimingResult(value, time.perf_counter() - start)

    def time_single_call(self, func: Callable[[], Any]) -> tuple[Any, float]:
        """Call `func` and return (result, seconds); exceptions propagate."""
        start = time.perf_counter()
        result = func()
        return result, time.perf_counter() - start
