"""
Exception hierarchy for EchoViews.

Every error raised on purpose by the library derives from `EchoViewsError`
and carries the process exit code the command-line entry point maps it to:
configuration problems exit with 2, data problems with 3 and numerical
problems with 4.

Author: EchoViews Contributors
License: MIT
"""

from pathlib import Path
from typing import Optional, Union


class EchoViewsError(Exception):
    """Base class for all EchoViews errors."""

    exit_code: int = 1


class ConfigError(EchoViewsError):
    """Invalid, unknown or unresolvable configuration value."""

    exit_code = 2


class DataError(EchoViewsError):
    """Malformed or inconsistent input data."""

    exit_code = 3


class MeshParseError(DataError):
    """
    A mesh or landmark file could not be parsed.

    Attributes:
        path: File being read
        line: 1-based line number, if known
    """

    def __init__(
        self,
        message: str,
        path: Optional[Union[str, Path]] = None,
        line: Optional[int] = None,
    ):
        self.path = Path(path) if path is not None else None
        self.line = line
        location = ""
        if self.path is not None:
            location = f"{self.path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")


class MeshValidationError(DataError):
    """A mesh violates one of the AnatomicalMesh invariants."""


class DownsampleError(DataError):
    """The requested vertex budget cannot be reached with closed surfaces."""


class CorrespondenceError(DataError):
    """Template and subject meshes cannot be put in correspondence."""


class DegenerateGeometryError(DataError):
    """Landmarks, planes or marker sets are geometrically degenerate."""


class DatasetFormatError(DataError):
    """A sample, metadata record or manifest on disk is corrupt."""


class SpiralError(DataError):
    """Spiral orderings cannot be built on the given topology."""


class NumericalError(EchoViewsError):
    """Non-finite values or failed gradient checks."""

    exit_code = 4


class ShapeError(EchoViewsError, ValueError):
    """Array shapes passed to a layer or metric do not match."""

    exit_code = 4
