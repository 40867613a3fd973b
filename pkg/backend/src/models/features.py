"""
Audio and feature domain models.

Waveforms, spectrogram configurations and extracted views.
"""

from __future__ import annotations

from enum import StrEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from exceptions import ConfigurationError

LOG_FLOOR = 1e-10


class ViewKind(StrEnum):
    """Low-level input representations of one audio clip."""

    MEL = "mel"
    GAMMATONE = "gam"
    CQT = "cqt"
    RAW = "raw"

    @property
    def is_spectral(self) -> bool:
        return self is not ViewKind.RAW

    @property
    def cache_code(self) -> int:
        return _CACHE_CODES[self]

    @classmethod
    def from_cache_code(cls, code: int) -> ViewKind:
        for kind, value in _CACHE_CODES.items():
            if value == code:
                return kind
        msg = f"Unknown view code {code}"
        raise ValueError(msg)

    @classmethod
    def parse(cls, name: str) -> ViewKind:
        aliases = {"gammatone": cls.GAMMATONE, "waveform": cls.RAW}
        key = name.strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError as e:
            valid = ", ".join(v.value for v in cls)
            msg = f"unknown view {name!r} (expected one of {valid})"
            raise ConfigurationError(msg) from e


_CACHE_CODES = {ViewKind.MEL: 0, ViewKind.GAMMATONE: 1, ViewKind.CQT: 2, ViewKind.RAW: 3}

ALL_VIEWS = (ViewKind.MEL, ViewKind.GAMMATONE, ViewKind.CQT, ViewKind.RAW)


class Waveform(BaseModel):
    """Mono audio samples in [-1, 1]."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    samples: np.ndarray = Field(description="float64 samples")
    sample_rate: int = Field(gt=0, description="Hz")

    @field_validator("samples")
    @classmethod
    def _mono_float(cls, v: np.ndarray) -> np.ndarray:
        arr = np.asarray(v, dtype=np.float64)
        if arr.ndim != 1:
            msg = f"waveform must be mono (1-D), got shape {arr.shape}"
            raise ValueError(msg)
        return arr

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def scaled(self, factor: float) -> Waveform:
        return Waveform(samples=self.samples * factor, sample_rate=self.sample_rate)


class SpectrogramConfig(BaseModel):
    """Time-frequency analysis parameters for one spectral view."""

    model_config = ConfigDict(frozen=True)

    view_kind: ViewKind
    n_bands: int = Field(default=64, gt=0)
    window_len: float = Field(default=0.04, gt=0.0, description="seconds")
    overlap: float = Field(default=0.5, ge=0.0, lt=1.0)
    cqt_bins_per_octave: int = Field(default=12, gt=0)
    cqt_hop: int | None = Field(default=None, gt=0, description="samples; derived when None")
    fmin: float | None = Field(default=None, gt=0.0, description="Hz; derived when None")

    @model_validator(mode="after")
    def _spectral_only(self) -> SpectrogramConfig:
        if not self.view_kind.is_spectral:
            msg = "SpectrogramConfig applies to mel, gam and cqt views only"
            raise ValueError(msg)
        return self

    def window_samples(self, sample_rate: int) -> int:
        return round(self.window_len * sample_rate)

    def hop_samples(self, sample_rate: int) -> int:
        return max(1, round(self.window_samples(sample_rate) * (1.0 - self.overlap)))

    def fft_size(self, sample_rate: int) -> int:
        return 1 << (self.window_samples(sample_rate) - 1).bit_length()

    def resolved_cqt_hop(self, sample_rate: int) -> int:
        """512 at 22.05 kHz, 1024 at 44.1 kHz, power-of-two scaled otherwise."""
        if self.cqt_hop is not None:
            return self.cqt_hop
        return int(2 ** round(np.log2(512 * sample_rate / 22050)))


class Spectrogram(BaseModel):
    """Log-magnitude matrix of T frames by F bands."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    config: SpectrogramConfig
    source_rate: int = Field(gt=0)

    @field_validator("values")
    @classmethod
    def _finite_matrix(cls, v: np.ndarray) -> np.ndarray:
        arr = np.asarray(v, dtype=np.float64)
        if arr.ndim != 2:
            msg = f"spectrogram must be 2-D, got shape {arr.shape}"
            raise ValueError(msg)
        if not np.all(np.isfinite(arr)):
            msg = "spectrogram contains non-finite values"
            raise ValueError(msg)
        return arr

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]


class FilterBank(BaseModel):
    """Band weights over FFT bins (or complex kernels for CQT)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    center_freqs: np.ndarray
    weights: np.ndarray = Field(description="(n_bands, n_bins)")
    sample_rate: int = Field(gt=0)

    @model_validator(mode="after")
    def _valid_centers(self) -> FilterBank:
        c = self.center_freqs
        if np.any(np.diff(c) <= 0):
            msg = "center frequencies must be strictly increasing"
            raise ValueError(msg)
        if c[0] <= 0 or c[-1] > self.sample_rate / 2:
            msg = "center frequencies must lie in (0, Nyquist]"
            raise ValueError(msg)
        return self

    @property
    def n_bands(self) -> int:
        return len(self.center_freqs)


class SegmentSpec(BaseModel):
    """Fixed input length of one view (frames or samples)."""

    model_config = ConfigDict(frozen=True)

    view: ViewKind
    length: int = Field(gt=0)
