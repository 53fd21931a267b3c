"""
Optional Numba acceleration.

Kernels in the geometry modules are written in the subset of Python that
Numba compiles in nopython mode. When Numba is not installed the same
functions run as plain Python with identical results, only slower.

Author: EchoViews Contributors
License: MIT

References:
    - Lam, S.K., Pitrou, A., & Seibert, S. (2015). "Numba: A LLVM-based
      Python JIT Compiler". LLVM-HPC2015.
"""

from typing import Any, Callable

try:
    from numba import jit
    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False


def kernel(func: Callable[..., Any]) -> Callable[..., Any]:
    """Compile `func` with Numba (nopython, cached) if available."""
    if NUMBA_AVAILABLE:
        return jit(nopython=True, cache=True)(func)
    return func
