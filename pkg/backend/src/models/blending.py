"""
Gradient-blending domain models.

A ``BranchLedger`` keeps one branch's evaluation history; ``BlendWeights``
are the normalized per-branch loss weights in force between evaluations.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

WEIGHT_SUM_TOLERANCE = 1e-12


class BranchLedger(BaseModel):
    """
    Loss history of one classification branch.

    ``train_losses`` are measured on the fixed training subset and
    ``true_losses`` on the validation set; both grow by one entry per
    evaluation. ``best_train``/``best_true`` are the minima of the smoothed
    histories seen so far, unset until the first weight computation.
    """

    model_config = ConfigDict(frozen=True)

    branch: str = Field(min_length=1)
    window: int = Field(default=5, ge=1, description="Smoothing window W in evaluations")
    train_losses: tuple[float, ...] = ()
    true_losses: tuple[float, ...] = ()
    best_train: float | None = None
    best_true: float | None = None

    @model_validator(mode="after")
    def _equal_length(self) -> BranchLedger:
        if len(self.train_losses) != len(self.true_losses):
            msg = (
                f"ledger {self.branch}: histories differ in length "
                f"({len(self.train_losses)} vs {len(self.true_losses)})"
            )
            raise ValueError(msg)
        return self

    @property
    def evaluations(self) -> int:
        return len(self.train_losses)

    @property
    def initialized(self) -> bool:
        return self.best_train is not None and self.best_true is not None

    def appended(self, train_loss: float, true_loss: float) -> BranchLedger:
        """Ledger with one more evaluation recorded."""
        if not (math.isfinite(train_loss) and math.isfinite(true_loss)):
            msg = f"ledger {self.branch}: non-finite loss ({train_loss}, {true_loss})"
            raise ValueError(msg)
        return self.model_copy(
            update={
                "train_losses": (*self.train_losses, float(train_loss)),
                "true_losses": (*self.true_losses, float(true_loss)),
            }
        )


class GOMeasures(BaseModel):
    """Generalization and overfitting measures of one branch at one evaluation."""

    model_config = ConfigDict(frozen=True)

    generalization: float = Field(description="G after clamping")
    overfitting: float = Field(description="O after clamping")
    raw_generalization: float = Field(description="G before clamping")
    raw_overfitting: float = Field(description="O before clamping")

    @field_validator("generalization", "overfitting")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            msg = f"measure must be finite, got {v}"
            raise ValueError(msg)
        return v


class AdaptiveWeight(BaseModel):
    """Unnormalized weight of one branch and the quantities behind it."""

    model_config = ConfigDict(frozen=True)

    branch: str
    weight: float = Field(ge=0.0)
    measures: GOMeasures
    smoothed_train: float
    smoothed_true: float
    degenerate: bool = Field(
        default=False,
        description="True on the first evaluation, when the references equal the smoothed losses",
    )


class BlendWeights(BaseModel):
    """Per-branch loss weights summing to one."""

    model_config = ConfigDict(frozen=True)

    weights: dict[str, float]
    normalizer: float = Field(default=1.0, gt=0.0, description="Z, the sum before normalization")

    @field_validator("weights")
    @classmethod
    def _valid(cls, v: dict[str, float]) -> dict[str, float]:
        if not v:
            msg = "blend weights need at least one branch"
            raise ValueError(msg)
        if any(not math.isfinite(w) or w < 0.0 for w in v.values()):
            msg = f"blend weights must be finite and non-negative, got {v}"
            raise ValueError(msg)
        if abs(math.fsum(v.values()) - 1.0) > WEIGHT_SUM_TOLERANCE:
            msg = f"blend weights must sum to 1, got {math.fsum(v.values())}"
            raise ValueError(msg)
        return v

    @property
    def branches(self) -> tuple[str, ...]:
        return tuple(self.weights)

    def of(self, branch: str) -> float:
        return self.weights.get(branch, 0.0)

    @classmethod
    def uniform(cls, branches: tuple[str, ...] | list[str]) -> BlendWeights:
        return cls(
            weights=dict.fromkeys(branches, 1.0 / len(branches)), normalizer=float(len(branches))
        )

    @classmethod
    def only(cls, branches: tuple[str, ...] | list[str], active: str) -> BlendWeights:
        """All weight on one branch."""
        if active not in branches:
            msg = f"branch {active!r} not in {tuple(branches)}"
            raise ValueError(msg)
        return cls(weights={b: 1.0 if b == active else 0.0 for b in branches}, normalizer=1.0)
