"""
Console and logging setup.

Library modules log through `logging.getLogger(__name__)`; the command-line
entry point calls `configure_logging` once to route those records through
rich when it is installed.

Author: EchoViews Contributors
License: MIT
"""

import logging
from typing import Optional

try:
    from rich.console import Console
    from rich.logging import RichHandler
    RICH_AVAILABLE = True
except ImportError:
    RICH_AVAILABLE = False

_console: Optional["Console"] = None


def get_console() -> Optional["Console"]:
    """Return the shared rich console, or None when rich is not installed."""
    global _console
    if not RICH_AVAILABLE:
        return None
    if _console is None:
        _console = Console()
    return _console


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    """
    Configure the root logger.

    Args:
        verbose: Log DEBUG records
        quiet: Only log warnings and errors (wins over verbose)
    """
    level = logging.INFO
    if verbose:
        level = logging.DEBUG
    if quiet:
        level = logging.WARNING

    if RICH_AVAILABLE:
        handler: logging.Handler = RichHandler(
            console=get_console(), show_path=False, rich_tracebacks=False
        )
        handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    else:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))

    root = logging.getLogger()
    for existing in list(root.handlers):
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(level)
