"""
CSV log and report repositories.

Training writes ``metrics.csv`` (one row per evaluation) and
``weights.csv`` (one row per evaluation and branch) into its output
directory; ``eval`` writes an evaluation report and ``blend-report`` pivots
the weight log.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from pathlib import Path
from typing import TYPE_CHECKING

from exceptions import RepositoryError
from repositories.base import BaseRepository
from schemas.logs import MetricsRow, WeightRow
from schemas.report import BlendReportRow, EvalRow

if TYPE_CHECKING:
    from collections.abc import Iterable

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
WEIGHTS_FILE = "weights.csv"


class MetricsRepository(BaseRepository[MetricsRow]):
    def __init__(self, path: Path | str) -> None:
        super().__init__(Path(path), "metrics")

    def _to_document(self, entity: MetricsRow) -> dict[str, str]:
        return entity.to_cells()

    def _from_document(self, doc: dict[str, str]) -> MetricsRow:
        return MetricsRow.from_cells(doc)


class WeightLogRepository(BaseRepository[WeightRow]):
    def __init__(self, path: Path | str) -> None:
        super().__init__(Path(path), "weights")

    def _to_document(self, entity: WeightRow) -> dict[str, str]:
        return entity.to_cells()

    def _from_document(self, doc: dict[str, str]) -> WeightRow:
        return WeightRow.model_validate(doc)


class EvalReportRepository(BaseRepository[EvalRow]):
    def __init__(self, path: Path | str) -> None:
        super().__init__(Path(path), "eval report")

    def _to_document(self, entity: EvalRow) -> dict[str, str]:
        return entity.to_cells()

    def _from_document(self, doc: dict[str, str]) -> EvalRow:
        return EvalRow.model_validate({k: v for k, v in doc.items() if v != ""})


class BlendReportRepository(BaseRepository[BlendReportRow]):
    """Weight trajectory with one column per branch."""

    def __init__(self, path: Path | str) -> None:
        super().__init__(Path(path), "blend report")

    def _to_document(self, entity: BlendReportRow) -> dict[str, str]:
        return entity.to_cells()

    def _from_document(self, doc: dict[str, str]) -> BlendReportRow:
        weights = {k: float(v) for k, v in doc.items() if k not in ("step", "epoch")}
        return BlendReportRow(step=int(doc["step"]), epoch=int(doc["epoch"]), weights=weights)


def pivot_weights(rows: Iterable[WeightRow]) -> list[BlendReportRow]:
    """
    One row per evaluation, branches in first-seen order.

    Raises:
        RepositoryError: If an evaluation is missing a branch that others have.
    """
    by_step: dict[tuple[int, int], dict[str, float]] = defaultdict(dict)
    branches: list[str] = []
    for row in rows:
        by_step[(row.step, row.epoch)][row.branch] = row.normalized_w
        if row.branch not in branches:
            branches.append(row.branch)
    report: list[BlendReportRow] = []
    for (step, epoch), weights in sorted(by_step.items()):
        if len(weights) != len(branches):
            missing = sorted(set(branches) - set(weights))
            raise RepositoryError(WEIGHTS_FILE, f"step {step} lacks branches {missing}")
        report.append(
            BlendReportRow(step=step, epoch=epoch, weights={b: weights[b] for b in branches})
        )
    return report


def write_blend_report(log_dir: Path | str, out: Path | str) -> list[BlendReportRow]:
    """Pivot ``<log_dir>/weights.csv`` into ``out``."""
    source = Path(log_dir)
    weights_path = source / WEIGHTS_FILE if source.is_dir() else source
    rows = pivot_weights(WeightLogRepository(weights_path).read_all())
    BlendReportRepository(out).write_all(rows)
    logger.info("Wrote blend report with %d evaluations to %s", len(rows), out)
    return rows
