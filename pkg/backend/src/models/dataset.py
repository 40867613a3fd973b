"""
Dataset domain models: manifests, split rules and synthetic dataset specs.
"""

from __future__ import annotations

from collections import Counter
from enum import StrEnum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from exceptions import ConfigurationError
from models.features import ALL_VIEWS, ViewKind


class ManifestRecord(BaseModel):
    """One labeled clip."""

    model_config = ConfigDict(frozen=True)

    path: Path
    label: int = Field(ge=0, description="Dense class id")
    fold: int = Field(ge=1, description="1-based fold number")
    source_id: str = Field(min_length=1, description="Recording source the clip was cut from")


class Manifest(BaseModel):
    """
    Labeled clips with their fold assignment.

    Class ids are dense ``0..C-1`` and every record's fold lies within
    ``1..n_folds``. A dev/eval partition is a two-fold manifest whose fold 2
    is the evaluation set.
    """

    model_config = ConfigDict(frozen=True)

    records: tuple[ManifestRecord, ...]
    class_names: tuple[str, ...]
    n_folds: int = Field(ge=1)

    @model_validator(mode="after")
    def _consistent(self) -> Manifest:
        if not self.records:
            msg = "manifest has no records"
            raise ValueError(msg)
        labels = {r.label for r in self.records}
        if labels != set(range(len(self.class_names))):
            msg = (
                f"class ids must be dense 0..{len(self.class_names) - 1}, "
                f"got {sorted(labels)}"
            )
            raise ValueError(msg)
        bad = [r for r in self.records if r.fold > self.n_folds]
        if bad:
            msg = f"{bad[0].path}: fold {bad[0].fold} outside 1..{self.n_folds}"
            raise ValueError(msg)
        duplicates = [p for p, n in Counter(r.path for r in self.records).items() if n > 1]
        if duplicates:
            msg = f"duplicate paths: {', '.join(str(p) for p in duplicates[:5])}"
            raise ValueError(msg)
        return self

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def __len__(self) -> int:
        return len(self.records)

    def fold(self, number: int) -> tuple[ManifestRecord, ...]:
        return tuple(r for r in self.records if r.fold == number)


class SplitRule(StrEnum):
    """How the validation set is drawn from the non-test data."""

    SOURCES_PER_CLASS = "sources_per_class"
    SOURCE_FRACTION = "source_fraction"
    SAMPLE_FRACTION = "sample_fraction"


class SplitSpec(BaseModel):
    """Validation holdout rule; ``value`` is a count or a fraction depending on the rule."""

    model_config = ConfigDict(frozen=True)

    rule: SplitRule = SplitRule.SAMPLE_FRACTION
    value: float = Field(default=0.1, gt=0.0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _value_fits_rule(self) -> SplitSpec:
        if self.rule is SplitRule.SOURCES_PER_CLASS:
            if self.value != int(self.value):
                msg = f"sources_per_class needs a whole count, got {self.value}"
                raise ValueError(msg)
        elif not 0.0 < self.value < 1.0:
            msg = f"{self.rule.value} needs a fraction in (0, 1), got {self.value}"
            raise ValueError(msg)
        return self

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> SplitSpec:
        """
        Parse ``rule:value`` such as ``sources_per_class:2``.

        Raises:
            ConfigurationError: On an unknown rule or a value the rule rejects.
        """
        rule, _, value = text.partition(":")
        try:
            return cls(rule=SplitRule(rule.strip()), value=float(value or 0.1), seed=seed)
        except ValueError as e:
            msg = f"invalid split {text!r}: {e}"
            raise ConfigurationError(msg) from e


class Split(BaseModel):
    """Disjoint train / validation / test partitions."""

    model_config = ConfigDict(frozen=True)

    train: tuple[ManifestRecord, ...]
    validation: tuple[ManifestRecord, ...]
    test: tuple[ManifestRecord, ...]

    @model_validator(mode="after")
    def _disjoint_nonempty(self) -> Split:
        if not self.train or not self.validation:
            msg = "train and validation partitions must be nonempty"
            raise ValueError(msg)
        seen: set[Path] = set()
        for part in (self.train, self.validation, self.test):
            paths = {r.path for r in part}
            if seen & paths:
                msg = "partitions overlap"
                raise ValueError(msg)
            seen |= paths
        return self


DEFAULT_SNR = {
    ViewKind.MEL: 4.0,
    ViewKind.GAMMATONE: 0.0,
    ViewKind.CQT: 2.0,
    ViewKind.RAW: 2.0,
}


class SynthSpec(BaseModel):
    """
    Synthetic multi-view dataset description.

    ``snr`` is the linear signal-to-noise power ratio of each view; 0 makes a
    view pure noise.
    """

    model_config = ConfigDict(frozen=True)

    n_classes: int = Field(default=4, ge=2)
    views: tuple[ViewKind, ...] = ALL_VIEWS
    samples_per_class: int = Field(default=200, ge=1)
    sources_per_class: int = Field(default=10, ge=1)
    snr: dict[ViewKind, float] = Field(default_factory=lambda: dict(DEFAULT_SNR))
    duration: float = Field(default=2.0, gt=0.0, description="Clip length in seconds")
    sample_rate: int = Field(default=8000, ge=1000)
    n_folds: int = Field(default=5, ge=1)
    seed: int = Field(default=0, ge=0)

    @field_validator("snr")
    @classmethod
    def _non_negative(cls, v: dict[ViewKind, float]) -> dict[ViewKind, float]:
        if any(s < 0.0 for s in v.values()):
            msg = f"per-view SNR must be >= 0, got {v}"
            raise ValueError(msg)
        return v

    @model_validator(mode="after")
    def _snr_per_view(self) -> SynthSpec:
        missing = [v.value for v in self.views if v not in self.snr]
        if missing:
            msg = f"no SNR given for views {missing}"
            raise ValueError(msg)
        return self

    @property
    def n_samples(self) -> int:
        return self.n_classes * self.samples_per_class
