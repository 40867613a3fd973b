"""Evaluation report rows and the pivoted weight report."""

from __future__ import annotations

from typing import ClassVar

from pydantic import Field

from schemas.common import CsvRow, format_cell

ENSEMBLE_BRANCH = "ensemble"


class EvalRow(CsvRow):
    """Accuracy (and loss, when defined) of one branch on one test set."""

    columns: ClassVar[tuple[str, ...]] = ("fold", "branch", "n_files", "loss", "accuracy")

    fold: int | None = None
    branch: str
    n_files: int = Field(ge=1)
    loss: float | None = None
    accuracy: float = Field(ge=0.0, le=1.0)


class BlendReportRow(CsvRow):
    """Normalized weights of every branch at one evaluation."""

    step: int = Field(ge=0)
    epoch: int = Field(ge=0)
    weights: dict[str, float]

    @classmethod
    def columns_for(cls, branches: tuple[str, ...]) -> tuple[str, ...]:
        return ("step", "epoch", *branches)

    def to_cells(self) -> dict[str, str]:
        cells = {"step": str(self.step), "epoch": str(self.epoch)}
        cells.update({b: format_cell(w) for b, w in self.weights.items()})
        return cells
