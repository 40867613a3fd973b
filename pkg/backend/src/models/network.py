"""
Network configuration models.

The ``paper`` preset holds the full-size 2D/1D CRNN layouts; the reduced
preset shrinks them for tests and the synthetic experiment.
"""

from __future__ import annotations

from enum import StrEnum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.features import ALL_VIEWS, ViewKind

JOINT_BRANCH = "joint"

FULL_FILTERS_2D = (32, 64, 128, 128, 256, 512)
FULL_FILTERS_1D = (64, 128, 128, 256, 512)
FULL_RAW_LENGTHS = (66650, 33330)
REDUCED_RAW_LENGTH = 4096


class Scale(StrEnum):
    """Network size preset."""

    PAPER = "paper"
    REDUCED = "reduced"


class ConvBlockSpec(BaseModel):
    """Convolution (+ batchnorm + ReLU) with an optional max-pooling stage."""

    model_config = ConfigDict(frozen=True)

    kernel: tuple[int, int] = (3, 3)
    stride: tuple[int, int] = (1, 1)
    n_filters: int = Field(gt=0)
    padding: Literal["SAME", "VALID"] = "SAME"
    pool_kernel: tuple[int, int] | None = (1, 2)
    pool_stride: tuple[int, int] | None = (1, 2)

    @field_validator("kernel", "stride", "pool_kernel", "pool_stride")
    @classmethod
    def _positive(cls, v: tuple[int, int] | None) -> tuple[int, int] | None:
        if v is not None and min(v) <= 0:
            msg = f"extents must be positive, got {v}"
            raise ValueError(msg)
        return v


class RawFrontSpec(BaseModel):
    """Layers turning a waveform into a (time, freq, 1) map."""

    model_config = ConfigDict(frozen=True)

    input_length: int = Field(gt=0)
    conv01: ConvBlockSpec
    conv02: ConvBlockSpec
    conv1: ConvBlockSpec


class NetworkConfig(BaseModel):
    """Hyper-parameters of the subnetworks and the joint head."""

    model_config = ConfigDict(frozen=True)

    n_classes: int = Field(ge=2)
    views: tuple[ViewKind, ...] = ALL_VIEWS
    scale: Scale = Scale.PAPER
    n_bands: int = Field(default=64, gt=0)
    spectral_frames: int = Field(default=75, gt=0, description="T of mel/gam inputs")
    cqt_frames: int = Field(default=65, gt=0, description="T of the CQT input")
    blocks_2d: tuple[ConvBlockSpec, ...]
    blocks_1d: tuple[ConvBlockSpec, ...]
    raw_front: RawFrontSpec
    gru_hidden: int = Field(default=256, gt=0)
    attention_dim: int = Field(default=64, gt=0)
    fc_widths: tuple[int, ...] = (1024, 1024)
    joint_widths: tuple[int, ...] = (4096, 4096)
    dropout: float = Field(default=0.1, ge=0.0, lt=1.0)

    @field_validator("views")
    @classmethod
    def _nonempty_unique(cls, v: tuple[ViewKind, ...]) -> tuple[ViewKind, ...]:
        if not v:
            msg = "view set must not be empty"
            raise ValueError(msg)
        if len(set(v)) != len(v):
            msg = f"duplicate views in {v}"
            raise ValueError(msg)
        return tuple(sorted(v, key=ALL_VIEWS.index))

    @model_validator(mode="after")
    def _blocks_collapse_frequency(self) -> NetworkConfig:
        if len(self.blocks_2d) == 0 or len(self.blocks_1d) == 0:
            msg = "at least one convolution block per subnetwork is required"
            raise ValueError(msg)
        return self

    @property
    def embedding_width(self) -> int:
        return 2 * self.gru_hidden

    @property
    def branches(self) -> tuple[str, ...]:
        return (*(v.value for v in self.views), JOINT_BRANCH)

    def input_length(self, view: ViewKind) -> int:
        if view is ViewKind.RAW:
            return self.raw_front.input_length
        if view is ViewKind.CQT:
            return self.cqt_frames
        return self.spectral_frames

    def with_views(self, views: tuple[ViewKind, ...]) -> NetworkConfig:
        return self.model_copy(update={"views": views})

    # ------------------------------------------------------------------
    # Presets
    # ------------------------------------------------------------------

    @classmethod
    def paper(
        cls,
        n_classes: int,
        views: tuple[ViewKind, ...] = ALL_VIEWS,
        raw_length: int = FULL_RAW_LENGTHS[0],
        dropout: float = 0.1,
    ) -> NetworkConfig:
        """Exact published configuration."""
        if raw_length not in FULL_RAW_LENGTHS:
            msg = f"full-scale raw input must be one of {FULL_RAW_LENGTHS}, got {raw_length}"
            raise ValueError(msg)
        pool02 = 64 if raw_length == FULL_RAW_LENGTHS[0] else 32
        return cls(
            n_classes=n_classes,
            views=views,
            scale=Scale.PAPER,
            blocks_2d=tuple(ConvBlockSpec(n_filters=f) for f in FULL_FILTERS_2D),
            blocks_1d=tuple(ConvBlockSpec(n_filters=f) for f in FULL_FILTERS_1D),
            raw_front=_raw_front(raw_length, (64, 16, pool02), (32, 64, 32)),
            dropout=dropout,
        )

    @classmethod
    def reduced(
        cls,
        n_classes: int,
        views: tuple[ViewKind, ...] = ALL_VIEWS,
        dropout: float = 0.1,
    ) -> NetworkConfig:
        """Desk-scale preset: filters / 4, GRU H=32, T=16, F=16, raw length 4096."""
        n_bands = 16
        blocks_2d = _quartered(FULL_FILTERS_2D, n_bands)
        # raw front yields n_bands // 2 frequency rows after pool1
        blocks_1d = _quartered(FULL_FILTERS_1D, n_bands // 2)
        return cls(
            n_classes=n_classes,
            views=views,
            scale=Scale.REDUCED,
            n_bands=n_bands,
            spectral_frames=16,
            cqt_frames=16,
            blocks_2d=blocks_2d,
            blocks_1d=blocks_1d,
            raw_front=_raw_front(REDUCED_RAW_LENGTH, (16, 4, 16), (8, 16, 8)),
            gru_hidden=32,
            attention_dim=16,
            fc_widths=(128, 128),
            joint_widths=(256, 256),
            dropout=dropout,
        )


def _quartered(filters: tuple[int, ...], freq_extent: int) -> tuple[ConvBlockSpec, ...]:
    count = max(1, freq_extent.bit_length() - 1)
    chosen = filters[-count:] if count <= len(filters) else filters
    return tuple(ConvBlockSpec(n_filters=max(1, f // 4)) for f in chosen)


def _raw_front(
    length: int,
    kernels: tuple[int, int, int],
    filters: tuple[int, int, int],
) -> RawFrontSpec:
    k01, k02, pool = kernels
    f01, f02, f1 = filters
    return RawFrontSpec(
        input_length=length,
        conv01=ConvBlockSpec(
            kernel=(k01, 1), stride=(2, 1), n_filters=f01, padding="VALID",
            pool_kernel=None, pool_stride=None,
        ),
        conv02=ConvBlockSpec(
            kernel=(k02, 1), stride=(2, 1), n_filters=f02, padding="VALID",
            pool_kernel=(pool, 1), pool_stride=(pool, 1),
        ),
        conv1=ConvBlockSpec(
            kernel=(5, 3), n_filters=f1, pool_kernel=(4, 2), pool_stride=(4, 2),
        ),
    )
