"""
EchoViews - Utility modules.

This package contains shared utilities used across the project.
"""

from .base_layer import Layer
from .errors import ConfigError, DataError, EchoViewsError, NumericalError

__all__ = ["Layer", "EchoViewsError", "ConfigError", "DataError", "NumericalError"]
