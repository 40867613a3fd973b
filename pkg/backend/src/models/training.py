"""
Training and evaluation domain models.
"""

from __future__ import annotations

import math
from enum import StrEnum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from exceptions import ConfigurationError
from models.blending import BlendWeights
from models.features import ViewKind
from models.network import JOINT_BRANCH, NetworkConfig


class TrainModeKind(StrEnum):
    BLEND = "blend"
    CONCAT = "concat"
    SINGLE = "single"
    LATE = "late"


class TrainMode(BaseModel):
    """Training mode; single-view training names its view (``single:cqt``)."""

    model_config = ConfigDict(frozen=True)

    kind: TrainModeKind
    view: ViewKind | None = None

    @model_validator(mode="after")
    def _view_only_for_single(self) -> TrainMode:
        if self.kind is TrainModeKind.SINGLE and self.view is None:
            msg = "single-view mode needs a view (single:<view>)"
            raise ValueError(msg)
        if self.kind is not TrainModeKind.SINGLE and self.view is not None:
            msg = f"mode {self.kind.value} takes no view"
            raise ValueError(msg)
        return self

    @classmethod
    def parse(cls, text: str) -> TrainMode:
        """
        Parse ``blend``, ``concat``, ``late`` or ``single:<view>``.

        Raises:
            ConfigurationError: If the text names no known mode or view.
        """
        head, _, tail = text.strip().lower().partition(":")
        aliases = {
            "multiview_blend": TrainModeKind.BLEND,
            "multiview_concat": TrainModeKind.CONCAT,
            "late_fusion": TrainModeKind.LATE,
            "single_view": TrainModeKind.SINGLE,
        }
        try:
            kind = aliases.get(head) or TrainModeKind(head)
        except ValueError as e:
            msg = f"unknown training mode {text!r}"
            raise ConfigurationError(msg) from e
        if kind is TrainModeKind.SINGLE:
            if not tail:
                msg = f"single-view mode needs a view, got {text!r}"
                raise ConfigurationError(msg)
            return cls(kind=kind, view=ViewKind.parse(tail))
        if tail:
            msg = f"mode {kind.value} takes no view, got {text!r}"
            raise ConfigurationError(msg)
        return cls(kind=kind)

    @property
    def is_multiview(self) -> bool:
        return self.kind in (TrainModeKind.BLEND, TrainModeKind.CONCAT)

    @property
    def primary_branch(self) -> str:
        """Branch whose validation accuracy drives model selection."""
        if self.view is not None:
            return self.view.value
        return JOINT_BRANCH

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.view.value}" if self.view else self.kind.value


class EnsembleWeights(BaseModel):
    """Blend weights snapshotted when the best validation accuracy was recorded."""

    model_config = ConfigDict(frozen=True)

    weights: dict[str, float]
    epoch: int = Field(default=0, ge=0)
    step: int = Field(default=0, ge=0)

    @field_validator("weights")
    @classmethod
    def _non_negative(cls, v: dict[str, float]) -> dict[str, float]:
        if not v or any(not math.isfinite(w) or w < 0.0 for w in v.values()):
            msg = f"ensemble weights must be finite and non-negative, got {v}"
            raise ValueError(msg)
        return v

    @property
    def branches(self) -> tuple[str, ...]:
        return tuple(self.weights)


class EvalReport(BaseModel):
    """File-level evaluation of every branch (and the self-ensemble) on one test set."""

    model_config = ConfigDict(frozen=True)

    n_files: int = Field(ge=1)
    n_classes: int = Field(ge=2)
    branch_losses: dict[str, float] = Field(default_factory=dict)
    branch_accuracies: dict[str, float] = Field(default_factory=dict)
    ensemble_accuracy: float | None = Field(default=None, ge=0.0, le=1.0)
    confusion: dict[str, list[list[int]]] = Field(
        default_factory=dict, description="Per-branch confusion counts [true][predicted]"
    )

    @field_validator("branch_accuracies")
    @classmethod
    def _unit_interval(cls, v: dict[str, float]) -> dict[str, float]:
        if any(not 0.0 <= a <= 1.0 for a in v.values()):
            msg = f"accuracies must lie in [0, 1], got {v}"
            raise ValueError(msg)
        return v

    def accuracy(self, branch: str) -> float:
        return self.branch_accuracies[branch]


class CrossValReport(BaseModel):
    """Per-fold reports and their arithmetic mean accuracies."""

    model_config = ConfigDict(frozen=True)

    folds: dict[int, EvalReport]
    mean_accuracies: dict[str, float]
    mean_ensemble_accuracy: float | None = None


class TrainResult(BaseModel):
    """Outcome of one training run."""

    model_config = ConfigDict(frozen=True)

    mode: str
    fold: int | None = None
    steps: int = Field(ge=0)
    epochs: int = Field(ge=0)
    best_epoch: int = Field(ge=0)
    best_step: int = Field(ge=0)
    best_val_accuracy: float = Field(ge=0.0, le=1.0)
    best_val_loss: float
    ensemble_weights: EnsembleWeights
    checkpoint_paths: list[str] = Field(default_factory=list)


class CheckpointMeta(BaseModel):
    """Everything a checkpoint stores besides its arrays."""

    model_config = ConfigDict(frozen=True)

    network: NetworkConfig
    train_config: dict[str, Any] = Field(default_factory=dict)
    mode: str
    class_names: tuple[str, ...] = ()
    blend_weights: BlendWeights | None = None
    ensemble_weights: EnsembleWeights | None = None
    best_val_accuracy: float = Field(default=0.0, ge=0.0, le=1.0)
    best_val_loss: float | None = None
    step: int = Field(default=0, ge=0)
    epoch: int = Field(default=0, ge=0)
    blender_state: dict[str, Any] | None = None
