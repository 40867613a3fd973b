"""
Training log rows.

The metrics log has one row per evaluation with per-branch columns
(``train_loss_<branch>``, ``val_loss_<branch>``, ``val_acc_<branch>``); the
weight log has one row per (evaluation, branch).
"""

from __future__ import annotations

from typing import Any, ClassVar

from pydantic import Field

from schemas.common import CsvRow, format_cell


class WeightRow(CsvRow):
    columns: ClassVar[tuple[str, ...]] = (
        "step",
        "epoch",
        "branch",
        "raw_w",
        "normalized_w",
        "G",
        "O",
        "smoothed_train_loss",
        "smoothed_true_loss",
    )

    step: int = Field(ge=0)
    epoch: int = Field(ge=0)
    branch: str
    raw_w: float = Field(ge=0.0)
    normalized_w: float = Field(ge=0.0, le=1.0)
    generalization: float = Field(alias="G")
    overfitting: float = Field(alias="O")
    smoothed_train_loss: float
    smoothed_true_loss: float


class MetricsRow(CsvRow):
    """One evaluation; per-branch values live in the three dictionaries."""

    base_columns: ClassVar[tuple[str, ...]] = (
        "step",
        "epoch",
        "lr",
        "blended_loss",
        "ensemble_val_acc",
    )

    step: int = Field(ge=0)
    epoch: int = Field(ge=0)
    lr: float = Field(gt=0.0)
    blended_loss: float
    ensemble_val_acc: float | None = Field(default=None, ge=0.0, le=1.0)
    train_loss: dict[str, float] = Field(default_factory=dict)
    val_loss: dict[str, float] = Field(default_factory=dict)
    val_acc: dict[str, float] = Field(default_factory=dict)

    @classmethod
    def columns_for(cls, branches: tuple[str, ...]) -> tuple[str, ...]:
        per_branch = tuple(
            f"{metric}_{branch}"
            for metric in ("train_loss", "val_loss", "val_acc")
            for branch in branches
        )
        return (*cls.base_columns, *per_branch)

    def to_cells(self) -> dict[str, str]:
        cells = {c: format_cell(getattr(self, c)) for c in self.base_columns}
        for metric in ("train_loss", "val_loss", "val_acc"):
            values: dict[str, float] = getattr(self, metric)
            cells.update({f"{metric}_{b}": format_cell(v) for b, v in values.items()})
        return cells

    @classmethod
    def from_cells(cls, cells: dict[str, str]) -> MetricsRow:
        data: dict[str, Any] = {c: cells.get(c) or None for c in cls.base_columns}
        for metric in ("train_loss", "val_loss", "val_acc"):
            prefix = f"{metric}_"
            data[metric] = {
                k.removeprefix(prefix): float(v)
                for k, v in cells.items()
                if k.startswith(prefix) and v != ""
            }
        return cls.model_validate(data)
