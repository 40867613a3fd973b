"""
``train``: train one fold of a manifest in the requested mode.
"""

from __future__ import annotations

import argparse
import logging

from pydantic import TypeAdapter

from commands.common import add_config_options, feature_service, load_run_config
from models.dataset import SplitSpec
from models.training import TrainResult
from repositories.manifest import load_manifest
from services.split_service import split
from services.training_service import train

logger = logging.getLogger(__name__)

RESULT_FILE = "train_result.json"
_RESULTS = TypeAdapter(list[TrainResult])


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("train", help="Train on one fold")
    add_config_options(parser)
    parser.add_argument(
        "--fold", type=int, default=None, help="Held-out test fold (default: the last fold)"
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    cfg, mode, views = load_run_config(args)
    manifest = load_manifest(args.manifest)
    fold = args.fold or manifest.n_folds
    partition = split(manifest, fold, SplitSpec.parse(args.split, seed=cfg.seed))
    features = feature_service(cfg, manifest, views, args.manifest, args.features)
    results = train(partition, cfg, mode, features, args.out, manifest.class_names, fold)

    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / RESULT_FILE).write_bytes(_RESULTS.dump_json(results, indent=2))
    for result in results:
        print(
            f"{result.mode}: best val_acc={result.best_val_accuracy:.4f} "
            f"at epoch {result.best_epoch} (step {result.best_step})"
        )
    return 0
