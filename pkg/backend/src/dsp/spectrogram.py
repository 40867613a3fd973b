"""
Log spectrogram views.

Mel and gammatone views weight STFT magnitudes (Hann window, 40 ms, 50 %
overlap by default) with their filterbanks; the CQT view applies a
constant-Q kernel bank to centered frames. Every view is clipped at
``LOG_FLOOR`` before the logarithm.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.fft import fft, rfft
from scipy.signal import get_window

from dsp.filterbanks import cqt_kernel, gammatone_filterbank, mel_filterbank
from exceptions import InvalidArgumentError, SignalTooShortError
from models.features import LOG_FLOOR, Spectrogram, SpectrogramConfig, ViewKind, Waveform

logger = logging.getLogger(__name__)


def _log(values: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(values, LOG_FLOOR))


def _require_kind(cfg: SpectrogramConfig, kind: ViewKind) -> None:
    if cfg.view_kind is not kind:
        msg = f"expected a {kind.value} config, got {cfg.view_kind.value}"
        raise InvalidArgumentError(msg)


def frame_count(n_samples: int, window: int, hop: int) -> int:
    """STFT frames: floor((N - win) / hop) + 1."""
    return (n_samples - window) // hop + 1


def stft_magnitude(w: Waveform, cfg: SpectrogramConfig) -> np.ndarray:
    """Magnitude spectra, shape (T, n_fft // 2 + 1)."""
    window = cfg.window_samples(w.sample_rate)
    hop = cfg.hop_samples(w.sample_rate)
    if len(w.samples) < window:
        raise SignalTooShortError("STFT", len(w.samples), window)
    frames = sliding_window_view(w.samples, window)[::hop]
    taper = get_window("hann", window, fftbins=True)
    return np.abs(rfft(frames * taper, n=cfg.fft_size(w.sample_rate), axis=1))


def mel_spectrogram(w: Waveform, cfg: SpectrogramConfig) -> Spectrogram:
    """Log mel-scale spectrogram, shape (T, n_bands)."""
    _require_kind(cfg, ViewKind.MEL)
    magnitudes = stft_magnitude(w, cfg)
    bank = mel_filterbank(w.sample_rate, cfg.fft_size(w.sample_rate), cfg.n_bands)
    return Spectrogram(
        values=_log(magnitudes @ bank.weights.T), config=cfg, source_rate=w.sample_rate
    )


def gammatone_spectrogram(w: Waveform, cfg: SpectrogramConfig) -> Spectrogram:
    """Log gammatone spectrogram on the same frame grid as the mel view."""
    _require_kind(cfg, ViewKind.GAMMATONE)
    magnitudes = stft_magnitude(w, cfg)
    bank = gammatone_filterbank(w.sample_rate, cfg.fft_size(w.sample_rate), cfg.n_bands)
    return Spectrogram(
        values=_log(magnitudes @ bank.weights.T), config=cfg, source_rate=w.sample_rate
    )


def cqt_spectrogram(w: Waveform, cfg: SpectrogramConfig) -> Spectrogram:
    """Log constant-Q spectrogram, shape (ceil(N / hop), n_bands)."""
    _require_kind(cfg, ViewKind.CQT)
    kernel = cqt_kernel(w.sample_rate, cfg.n_bands, cfg.cqt_bins_per_octave, cfg.fmin)
    n_samples = len(w.samples)
    if n_samples < kernel.longest:
        raise SignalTooShortError("CQT", n_samples, kernel.longest)
    hop = cfg.resolved_cqt_hop(w.sample_rate)
    half = kernel.n_fft // 2
    padded = np.pad(w.samples, (half, kernel.n_fft - half))
    n_frames = -(-n_samples // hop)
    frames = sliding_window_view(padded, kernel.n_fft)[::hop][:n_frames]
    response = np.abs(fft(frames, axis=1) @ kernel.spectral)
    return Spectrogram(values=_log(response), config=cfg, source_rate=w.sample_rate)


_EXTRACTORS = {
    ViewKind.MEL: mel_spectrogram,
    ViewKind.GAMMATONE: gammatone_spectrogram,
    ViewKind.CQT: cqt_spectrogram,
}


def extract_view(w: Waveform, view: ViewKind, cfg: SpectrogramConfig | None = None) -> np.ndarray:
    """
    Feature matrix of one view: (T, F) for spectral views, (N, 1) for raw.
    """
    if view is ViewKind.RAW:
        return w.samples.reshape(-1, 1)
    config = cfg or SpectrogramConfig(view_kind=view)
    spectrogram = _EXTRACTORS[view](w, config)
    logger.debug("Extracted %s view with shape %s", view.value, spectrogram.shape)
    return spectrogram.values
