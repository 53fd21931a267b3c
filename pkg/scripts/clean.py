#!/usr/bin/env python3
"""
Cleanup Script for EchoViews

Removes run outputs, caches, and build artifacts.

Usage:
    python scripts/clean.py [--all] [--runs] [--build] [--cache]

Options:
    --all       Remove everything (runs, build, cache)
    --runs      Remove pipeline outputs below runs/ (meshes, datasets, models, reports)
    --build     Remove build artifacts (build/, dist/, *.egg-info)
    --cache     Remove Python, pytest, mypy and Numba caches

Author: EchoViews Contributors
License: MIT
"""

import argparse
import shutil
import sys
from pathlib import Path

project_root = Path(__file__).parent.parent


def _remove(path: Path) -> int:
    if path.is_dir():
        shutil.rmtree(path)
    elif path.exists():
        path.unlink()
    else:
        return 0
    print(f"Removed: {path}")
    return 1


def clean_runs(runs_dir: Path = project_root / "runs") -> int:
    """Remove every run directory below `runs_dir`."""
    if not runs_dir.exists():
        print("No runs directory found")
        return 0
    count = sum(_remove(child) for child in sorted(runs_dir.iterdir()))
    print(f"Cleaned {count} run item(s)")
    return count


def clean_build() -> int:
    count = _remove(project_root / "build") + _remove(project_root / "dist")
    count += sum(_remove(egg) for egg in project_root.glob("*.egg-info"))
    print(f"Cleaned {count} build artifact(s)")
    return count


def clean_cache() -> int:
    count = 0
    for pattern in ("__pycache__", "*.pyc", "*.nbi", "*.nbc"):
        for path in project_root.rglob(pattern):
            if not {"venv", ".venv"} & set(path.relative_to(project_root).parts):
                count += _remove(path)
    count += _remove(project_root / ".pytest_cache") + _remove(project_root / ".mypy_cache")
    print(f"Cleaned {count} cache item(s)")
    return count


def main() -> int:
    parser = argparse.ArgumentParser(description="Clean EchoViews generated files")
    parser.add_argument("--all", "-a", action="store_true", help="Remove all generated files")
    parser.add_argument("--runs", "-r", action="store_true", help="Remove pipeline outputs")
    parser.add_argument("--build", "-b", action="store_true", help="Remove build artifacts")
    parser.add_argument("--cache", "-c", action="store_true", help="Remove caches")
    args = parser.parse_args()

    # Default to --all if no options specified
    if not (args.all or args.runs or args.build or args.cache):
        args.all = True

    print("EchoViews Cleanup")
    print("=" * 40)
    if args.all or args.cache:
        print("\nCleaning cache...")
        clean_cache()
    if args.all or args.build:
        print("\nCleaning build artifacts...")
        clean_build()
    if args.all or args.runs:
        print("\nCleaning runs...")
        clean_runs()
    print("\nCleanup complete!")
    return 0


if __name__ == "__main__":
    sys.exit(main())
