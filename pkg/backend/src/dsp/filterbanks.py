"""
Filterbank construction for the spectral views.

- Mel: triangular filters on the HTK mel scale.
- Gammatone: 4th-order gammatone magnitude responses at ERB-spaced centers
  (Glasberg-Moore), applied to STFT magnitudes.
- CQT: complex Hann-windowed kernels, 12 bins per octave by default,
  transformed to the frequency domain for frame-wise application.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.fft import fft, rfftfreq
from scipy.signal import get_window

from models.features import FilterBank

A4_HZ = 440.0
GAMMATONE_ORDER = 4
GAMMATONE_FMIN_HZ = 50.0


# =============================================================================
# Frequency scales
# =============================================================================


def hz_to_mel(freq: np.ndarray | float) -> np.ndarray:
    return 2595.0 * np.log10(1.0 + np.asarray(freq, dtype=np.float64) / 700.0)


def mel_to_hz(mel: np.ndarray | float) -> np.ndarray:
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def erb_bandwidth(freq: np.ndarray | float) -> np.ndarray:
    """Equivalent rectangular bandwidth in Hz."""
    return 24.7 * (4.37e-3 * np.asarray(freq, dtype=np.float64) + 1.0)


def hz_to_erb_rate(freq: np.ndarray | float) -> np.ndarray:
    return 21.4 * np.log10(1.0 + 4.37e-3 * np.asarray(freq, dtype=np.float64))


def erb_rate_to_hz(erb: np.ndarray | float) -> np.ndarray:
    return (10.0 ** (np.asarray(erb, dtype=np.float64) / 21.4) - 1.0) / 4.37e-3


# =============================================================================
# Banks over STFT bins
# =============================================================================


@lru_cache(maxsize=32)
def mel_filterbank(sample_rate: int, n_fft: int, n_bands: int) -> FilterBank:
    """Triangular HTK-mel filters from 0 Hz to Nyquist."""
    fft_freqs = rfftfreq(n_fft, d=1.0 / sample_rate)
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_bands + 2))
    widths = np.diff(edges)
    ramps = edges[:, None] - fft_freqs[None, :]
    rising = -ramps[:-2] / widths[:-1, None]
    falling = ramps[2:] / widths[1:, None]
    weights = np.maximum(0.0, np.minimum(rising, falling))
    weights.setflags(write=False)
    return FilterBank(center_freqs=edges[1:-1], weights=weights, sample_rate=sample_rate)


def mel_weight_at(bank: FilterBank, freq: float) -> np.ndarray:
    """Evaluate every triangle of ``bank`` at an arbitrary frequency."""
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(bank.sample_rate / 2.0), bank.n_bands + 2))
    widths = np.diff(edges)
    rising = (freq - edges[:-2]) / widths[:-1]
    falling = (edges[2:] - freq) / widths[1:]
    return np.maximum(0.0, np.minimum(rising, falling))


@lru_cache(maxsize=32)
def gammatone_filterbank(
    sample_rate: int,
    n_fft: int,
    n_bands: int,
    fmin: float = GAMMATONE_FMIN_HZ,
) -> FilterBank:
    """Gammatone magnitude responses with centers evenly spaced in ERB rate."""
    nyquist = sample_rate / 2.0
    low = min(fmin, nyquist / 4.0)
    centers = erb_rate_to_hz(np.linspace(hz_to_erb_rate(low), hz_to_erb_rate(nyquist), n_bands))
    centers[-1] = min(centers[-1], nyquist)
    bandwidths = 1.019 * erb_bandwidth(centers)
    fft_freqs = rfftfreq(n_fft, d=1.0 / sample_rate)
    detuning = (fft_freqs[None, :] - centers[:, None]) / bandwidths[:, None]
    weights = (1.0 + detuning**2) ** (-GAMMATONE_ORDER / 2.0)
    weights.setflags(write=False)
    return FilterBank(center_freqs=centers, weights=weights, sample_rate=sample_rate)


# =============================================================================
# Constant-Q kernels
# =============================================================================


def default_cqt_fmin(sample_rate: int, n_bins: int, bins_per_octave: int) -> float:
    """Highest equal-tempered pitch at or below Nyquist / 2**(n_bins / bins_per_octave)."""
    ceiling = (sample_rate / 2.0) / 2.0 ** (n_bins / bins_per_octave)
    semitone = math.floor(12.0 * math.log2(ceiling / A4_HZ) + 1e-9)
    return A4_HZ * 2.0 ** (semitone / 12.0)


def cqt_frequencies(fmin: float, n_bins: int, bins_per_octave: int) -> np.ndarray:
    return fmin * 2.0 ** (np.arange(n_bins) / bins_per_octave)


class CqtKernel:
    """Frequency-domain CQT kernel bank of shape (n_bins, n_fft)."""

    def __init__(
        self,
        sample_rate: int,
        n_bins: int,
        bins_per_octave: int,
        fmin: float | None = None,
    ) -> None:
        self.sample_rate = sample_rate
        self.bins_per_octave = bins_per_octave
        self.fmin = fmin if fmin is not None else default_cqt_fmin(
            sample_rate, n_bins, bins_per_octave
        )
        freqs = cqt_frequencies(self.fmin, n_bins, bins_per_octave)
        if freqs[-1] > sample_rate / 2.0:
            msg = f"top CQT bin {freqs[-1]:.1f} Hz exceeds Nyquist"
            raise ValueError(msg)
        quality = 1.0 / (2.0 ** (1.0 / bins_per_octave) - 1.0)
        self.lengths = np.ceil(quality * sample_rate / freqs).astype(np.int64)
        self.n_fft = 1 << int(self.lengths.max() - 1).bit_length()

        kernels = np.zeros((n_bins, self.n_fft), dtype=np.complex128)
        for k, (freq, length) in enumerate(zip(freqs, self.lengths, strict=True)):
            window = get_window("hann", int(length), fftbins=False)
            t = np.arange(length) - (length - 1) / 2.0
            start = (self.n_fft - length) // 2
            kernels[k, start : start + length] = (
                window * np.exp(2j * np.pi * freq * t / sample_rate) / window.sum()
            )
        self.spectral = np.conj(fft(kernels, axis=1)).T / self.n_fft
        self.bank = FilterBank(center_freqs=freqs, weights=np.abs(kernels), sample_rate=sample_rate)

    @property
    def longest(self) -> int:
        return int(self.lengths.max())


@lru_cache(maxsize=16)
def cqt_kernel(
    sample_rate: int,
    n_bins: int,
    bins_per_octave: int,
    fmin: float | None = None,
) -> CqtKernel:
    return CqtKernel(sample_rate, n_bins, bins_per_octave, fmin)
