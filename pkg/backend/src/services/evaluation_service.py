"""
Checkpoint evaluation, report rows and cross-validation means.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import TYPE_CHECKING

from exceptions import InvalidArgumentError
from models.features import ALL_VIEWS
from models.training import CrossValReport, EnsembleWeights
from repositories.checkpoint import CHECKPOINT_NAME, CheckpointRepository, load_checkpoint
from schemas.report import ENSEMBLE_BRANCH, EvalRow
from services.feature_service import FeatureService
from services.inference_service import (
    LATE_BRANCH,
    evaluate_predictions,
    late_predictions,
    predict,
    restore_network,
)

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from models.dataset import ManifestRecord
    from models.features import ViewKind
    from models.training import EvalReport
    from repositories.feature_cache import FeatureCacheRepository

logger = logging.getLogger(__name__)


def is_late_run(path: Path) -> bool:
    return path.is_dir() and not (path / CHECKPOINT_NAME).is_file()


def evaluate_checkpoint(
    path: Path | str,
    records: Sequence[ManifestRecord],
    n_classes: int,
    *,
    ensemble: bool = False,
    views: Sequence[ViewKind] | None = None,
    cache: FeatureCacheRepository | None = None,
    root: Path | None = None,
) -> EvalReport:
    """
    Evaluate a checkpoint file or training directory on ``records``.

    A directory without ``best.bckp`` is read as a late-fusion run with one
    sub-directory per view (all four views unless ``views`` is given).

    Raises:
        MissingCheckpointError: If a required checkpoint is absent.
        InvalidArgumentError: If ``records`` is empty.
    """
    target = Path(path)
    labels = [r.label for r in records]
    if is_late_run(target):
        wanted = tuple(views) if views else ALL_VIEWS
        loaded = CheckpointRepository(target).load_late(wanted)
        nets = [restore_network(meta, arrays) for meta, arrays in loaded.values()]
        n_bands = next(iter(loaded.values()))[0].network.n_bands
        features = FeatureService(wanted, n_bands, cache=cache, root=root)
        probs = late_predictions(nets, features.extract_all(records))
        report = evaluate_predictions(probs, labels, n_classes)
        logger.info("Late fusion accuracy %.4f", report.accuracy(LATE_BRANCH))
        return report

    checkpoint = target / CHECKPOINT_NAME if target.is_dir() else target
    meta, arrays = load_checkpoint(checkpoint)
    net = restore_network(meta, arrays)
    features = FeatureService(net.views, meta.network.n_bands, cache=cache, root=root)
    probs = predict(net, features.extract_all(records))
    weights: EnsembleWeights | None = None
    if ensemble:
        weights = meta.ensemble_weights or EnsembleWeights(
            weights=dict.fromkeys(net.branches, 1.0)
        )
    report = evaluate_predictions(probs, labels, n_classes, weights)
    logger.info(
        "Evaluated %s on %d files: %s",
        checkpoint,
        report.n_files,
        ", ".join(f"{b}={a:.4f}" for b, a in report.branch_accuracies.items()),
    )
    return report


def report_rows(report: EvalReport, fold: int | None = None) -> list[EvalRow]:
    """One row per branch, plus the self-ensemble when it was computed."""
    rows = [
        EvalRow(
            fold=fold,
            branch=branch,
            n_files=report.n_files,
            loss=report.branch_losses.get(branch),
            accuracy=accuracy,
        )
        for branch, accuracy in report.branch_accuracies.items()
    ]
    if report.ensemble_accuracy is not None:
        rows.append(
            EvalRow(
                fold=fold,
                branch=ENSEMBLE_BRANCH,
                n_files=report.n_files,
                accuracy=report.ensemble_accuracy,
            )
        )
    return rows


def summary_line(report: EvalReport) -> str:
    parts = [f"{b}={a:.4f}" for b, a in report.branch_accuracies.items()]
    if report.ensemble_accuracy is not None:
        parts.append(f"{ENSEMBLE_BRANCH}={report.ensemble_accuracy:.4f}")
    return f"accuracy ({report.n_files} files): " + " ".join(parts)


def crossval_report(reports: Mapping[int, EvalReport]) -> CrossValReport:
    """Arithmetic mean of every branch's accuracy over the folds."""
    if not reports:
        msg = "cross-validation produced no fold reports"
        raise InvalidArgumentError(msg)
    branches = sorted({b for r in reports.values() for b in r.branch_accuracies})
    means = {
        b: math.fsum(r.branch_accuracies[b] for r in reports.values()) / len(reports)
        for b in branches
        if all(b in r.branch_accuracies for r in reports.values())
    }
    ensembles = [r.ensemble_accuracy for r in reports.values()]
    mean_ensemble = (
        math.fsum(e for e in ensembles if e is not None) / len(ensembles)
        if all(e is not None for e in ensembles)
        else None
    )
    return CrossValReport(
        folds=dict(reports), mean_accuracies=means, mean_ensemble_accuracy=mean_ensemble
    )
