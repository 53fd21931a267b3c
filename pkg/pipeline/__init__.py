"""
EchoViews - Pipeline commands.

Orchestration of prepare, generate, train, eval and verify over the
artifacts below the configured output root.
"""

from .commands import (
    EvalOutcome,
    PrepareResult,
    TrainOutcome,
    cmd_eval,
    cmd_generate,
    cmd_prepare,
    cmd_train,
    cmd_verify,
    load_prepared,
)

__all__ = [
    "EvalOutcome",
    "PrepareResult",
    "TrainOutcome",
    "cmd_eval",
    "cmd_generate",
    "cmd_prepare",
    "cmd_train",
    "cmd_verify",
    "load_prepared",
]
