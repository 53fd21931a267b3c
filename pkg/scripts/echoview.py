#!/usr/bin/env python3
"""
EchoViews command-line interface

Single entry point for the synthetic echocardiography view pipeline.

Usage:
    python scripts/echoview.py <command> [options]

Commands:
    prepare     Build the template and corresponded meshes
    generate    Sample the label-image dataset
    train       Train the image-to-mesh model
    eval        Evaluate view recognition and localisation
    verify      Run the oracle verification suites

Options (all commands):
    --config FILE         JSON run configuration
    --seed N              Master seed
    --workers N           Worker processes for generation
    --image-size N        Image width and height in pixels
    --out DIR             Output root (else $ECHOVIEWS_OUTPUT_ROOT, else the config)
    --verbose / --quiet   Log level

Exit codes:
    0 success, 1 unexpected error, 2 configuration error,
    3 data error, 4 numerical error or failed verification

Example:
    python scripts/echoview.py prepare --config configs/desk.json
    python scripts/echoview.py generate --config configs/desk.json --workers 4
    python scripts/echoview.py eval --config configs/desk.json --gt-as-prediction

Author: EchoViews Contributors
License: MIT
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from output.console_formatter import ConsoleFormatter
from pipeline.commands import cmd_eval, cmd_generate, cmd_prepare, cmd_train, cmd_verify
from utils.config import RunConfig, apply_overrides, load_config
from utils.console import configure_logging
from utils.errors import DataError, EchoViewsError, NumericalError

logger = logging.getLogger("echoview")

COMMANDS = ("prepare", "generate", "train", "eval", "verify")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="echoview",
        description="EchoViews: view recognition from synthetic echocardiography label images",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  echoview prepare --config configs/desk.json
  echoview generate --config configs/desk.json --seed 3
  echoview train --config configs/desk.json
  echoview eval --config configs/desk.json --gt-as-prediction
  echoview verify
        """,
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", type=Path, help="JSON run configuration")
    common.add_argument("--seed", type=int, help="Master seed (overrides the config)")
    common.add_argument("--workers", "-w", type=int, help="Worker processes")
    common.add_argument("--image-size", type=int, help="Image width and height in pixels")
    common.add_argument("--out", "-o", help="Output root directory")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    common.add_argument("--quiet", "-q", action="store_true", help="Warnings and errors only")

    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    sub.add_parser("prepare", parents=[common], help="Build template and corresponded meshes")
    sub.add_parser("generate", parents=[common], help="Generate the dataset")
    sub.add_parser("train", parents=[common], help="Train the image-to-mesh model")
    eval_parser = sub.add_parser("eval", parents=[common], help="Evaluate a trained model")
    eval_parser.add_argument(
        "--gt-as-prediction",
        action="store_true",
        default=None,
        help="Score the ground truth instead of the model (sanity check)",
    )
    sub.add_parser("verify", parents=[common], help="Run the oracle verification suites")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    return apply_overrides(
        config,
        seed=args.seed,
        workers=args.workers,
        image_size=args.image_size,
        output_root=args.out,
    )


def run_command(args: argparse.Namespace, config: RunConfig, formatter: ConsoleFormatter) -> int:
    if args.command == "prepare":
        result = cmd_prepare(config)
        logger.info(
            "template %s... with %d vertices, %d mesh(es) in %s",
            result.topology_id[:12],
            result.template.n_vertices,
            len(result.meshes),
            config.paths.meshes,
        )
    elif args.command == "generate":
        formatter.display_manifest(cmd_generate(config))
    elif args.command == "train":
        outcome = cmd_train(config)
        formatter.display_training(outcome.result, every=max(1, len(outcome.result.history) // 20))
    elif args.command == "eval":
        outcome = cmd_eval(config, gt_as_prediction=args.gt_as_prediction)
        formatter.display_report(outcome.report)
        logger.info("report written to %s", config.paths.evaluation)
    elif args.command == "verify":
        summary = cmd_verify(config)
        formatter.display_verification(summary)
        if not summary.passed:
            return NumericalError.exit_code
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(verbose=args.verbose, quiet=args.quiet)
    try:
        config = resolve_config(args)
        return run_command(args, config, ConsoleFormatter())
    except EchoViewsError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
