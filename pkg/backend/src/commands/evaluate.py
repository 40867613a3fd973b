"""
``eval``: evaluate a checkpoint (or a late-fusion run) on a test fold.
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from commands.common import cache_repository, parse_views
from repositories.logs import EvalReportRepository
from repositories.manifest import load_manifest
from services.evaluation_service import evaluate_checkpoint, report_rows, summary_line

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("eval", help="Evaluate a checkpoint")
    parser.add_argument(
        "--checkpoint", required=True, type=Path, help="Checkpoint file or training directory"
    )
    parser.add_argument("--manifest", required=True, type=Path, help="Manifest CSV")
    parser.add_argument("--fold", type=int, default=None, help="Test fold (default: all records)")
    parser.add_argument(
        "--ensemble", action="store_true", help="Also report the weighted self-ensemble"
    )
    parser.add_argument("--views", default=None, help="Views of a late-fusion run")
    parser.add_argument("--features", type=Path, default=None, help="Feature cache directory")
    parser.add_argument("--out", type=Path, default=None, help="Report CSV")
    parser.set_defaults(handler=run)


def default_report_path(checkpoint: Path, fold: int | None) -> Path:
    directory = checkpoint if checkpoint.is_dir() else checkpoint.parent
    suffix = f"_fold{fold}" if fold is not None else ""
    return directory / f"eval{suffix}.csv"


def run(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    records = manifest.fold(args.fold) if args.fold is not None else manifest.records
    report = evaluate_checkpoint(
        args.checkpoint,
        records,
        manifest.n_classes,
        ensemble=args.ensemble,
        views=parse_views(args.views) if args.views else None,
        cache=cache_repository(args.features),
        root=args.manifest.parent,
    )
    out = args.out or default_report_path(args.checkpoint, args.fold)
    EvalReportRepository(out).write_all(report_rows(report, args.fold))
    print(summary_line(report))
    return 0
