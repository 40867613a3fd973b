"""
``crossval``: train and evaluate every fold, then report mean accuracies.
"""

from __future__ import annotations

import argparse
import logging

from commands.common import add_config_options, feature_service, load_run_config
from models.dataset import SplitSpec
from repositories.logs import EvalReportRepository
from repositories.manifest import load_manifest
from schemas.report import ENSEMBLE_BRANCH, EvalRow
from services.evaluation_service import crossval_report, evaluate_checkpoint, report_rows
from services.split_service import split
from services.training_service import train

logger = logging.getLogger(__name__)

CROSSVAL_FILE = "crossval.csv"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("crossval", help="Cross-validate over the manifest folds")
    add_config_options(parser)
    parser.add_argument(
        "--folds",
        default=None,
        help="Comma-separated test folds (default: every fold; use 2 for a dev/eval split)",
    )
    parser.add_argument(
        "--ensemble", action="store_true", help="Also report the weighted self-ensemble"
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg, mode, views = load_run_config(args)
    manifest = load_manifest(args.manifest)
    folds = (
        [int(f) for f in args.folds.split(",")]
        if args.folds
        else list(range(1, manifest.n_folds + 1))
    )
    features = feature_service(cfg, manifest, views, args.manifest, args.features)

    reports = {}
    for fold in folds:
        out = args.out / f"fold{fold}"
        partition = split(manifest, fold, SplitSpec.parse(args.split, seed=cfg.seed))
        train(partition, cfg, mode, features, out, manifest.class_names, fold)
        reports[fold] = evaluate_checkpoint(
            out,
            partition.test,
            manifest.n_classes,
            ensemble=args.ensemble,
            views=views,
            cache=features.cache,
            root=features.root,
        )
        logger.info("Fold %d done", fold)

    summary = crossval_report(reports)
    rows = [row for fold, report in reports.items() for row in report_rows(report, fold)]
    rows.extend(
        EvalRow(branch=branch, n_files=sum(r.n_files for r in reports.values()), accuracy=acc)
        for branch, acc in summary.mean_accuracies.items()
    )
    if summary.mean_ensemble_accuracy is not None:
        rows.append(
            EvalRow(
                branch=ENSEMBLE_BRANCH,
                n_files=sum(r.n_files for r in reports.values()),
                accuracy=summary.mean_ensemble_accuracy,
            )
        )
    EvalReportRepository(args.out / CROSSVAL_FILE).write_all(rows)
    means = " ".join(f"{b}={a:.4f}" for b, a in summary.mean_accuracies.items())
    print(f"mean accuracy over {len(folds)} folds: {means}")
    return 0
