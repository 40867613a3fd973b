"""
``blend-report``: pivot a run's weight log into one row per evaluation.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from repositories.logs import write_blend_report


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("blend-report", help="Weight trajectory of a training run")
    parser.add_argument("--log", required=True, type=Path, help="Training output directory")
    parser.add_argument("--out", required=True, type=Path, help="Output CSV")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    rows = write_blend_report(args.log, args.out)
    print(f"wrote {len(rows)} evaluations to {args.out}")
    return 0
