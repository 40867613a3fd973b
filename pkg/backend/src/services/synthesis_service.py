"""
Synthetic multi-view dataset generator.

Every clip starts from a class-dependent multi-tone signal. Each view gets
its own fixed transform of that signal (band emphasis, chirp modulation,
amplitude envelope or passthrough) mixed with white noise at the view's
linear SNR, and is written as the companion file ``<clip>.<view>.wav``.
A view with SNR 0 is pure noise. Folds are assigned per recording source so
sources never straddle a fold boundary.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from scipy.signal import butter, sosfiltfilt

from dsp import save_wav
from exceptions import InvalidArgumentError
from models.dataset import Manifest, ManifestRecord
from models.features import ViewKind, Waveform
from repositories.manifest import save_manifest

if TYPE_CHECKING:
    from models.dataset import SynthSpec

logger = logging.getLogger(__name__)

TONES_PER_CLASS = 3
MIX_LEVEL = 0.25
LOWEST_TONE_HZ = 150.0
MANIFEST_NAME = "manifest.csv"


def tone_grid(n_classes: int, sample_rate: int) -> np.ndarray:
    """(n_classes, TONES_PER_CLASS) log-spaced tone frequencies, interleaved by class."""
    top = 0.35 * sample_rate
    grid = np.geomspace(LOWEST_TONE_HZ, top, TONES_PER_CLASS * n_classes)
    return grid.reshape(TONES_PER_CLASS, n_classes).T


def mix_at_snr(signal: np.ndarray, noise: np.ndarray, snr: float) -> np.ndarray:
    """
    Unit-power mixture ``a*s + b*n`` with ``a**2 / b**2 = snr`` and ``a**2 + b**2 = 1``.

    Both inputs are first scaled to unit RMS.
    """
    if snr < 0.0:
        msg = f"SNR must be >= 0, got {snr}"
        raise InvalidArgumentError(msg)
    a = math.sqrt(snr / (1.0 + snr))
    b = math.sqrt(1.0 / (1.0 + snr))
    return a * _unit_rms(signal) + b * _unit_rms(noise)


def _unit_rms(x: np.ndarray) -> np.ndarray:
    rms = float(np.sqrt(np.mean(x * x)))
    return x / rms if rms > 0.0 else x


def band_emphasis(x: np.ndarray, sample_rate: int) -> np.ndarray:
    """Lower half of the tone range boosted over the rest."""
    sos = butter(4, 0.12 * sample_rate, btype="lowpass", fs=sample_rate, output="sos")
    return x + 2.0 * sosfiltfilt(sos, x)


def chirp_modulation(x: np.ndarray, sample_rate: int) -> np.ndarray:
    t = np.arange(len(x)) / sample_rate
    sweep = 2.0 * np.pi * (5.0 * t + 10.0 * t * t)
    return x * np.cos(sweep)


def amplitude_envelope(x: np.ndarray, sample_rate: int) -> np.ndarray:
    t = np.arange(len(x)) / sample_rate
    return x * (0.55 + 0.45 * np.sin(2.0 * np.pi * 2.0 * t))


def passthrough(x: np.ndarray, sample_rate: int) -> np.ndarray:  # noqa: ARG001
    return x


VIEW_TRANSFORMS = {
    ViewKind.MEL: band_emphasis,
    ViewKind.GAMMATONE: chirp_modulation,
    ViewKind.CQT: amplitude_envelope,
    ViewKind.RAW: passthrough,
}


def base_signal(
    tones: np.ndarray,
    detune: float,
    n_samples: int,
    sample_rate: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sum of the class tones, detuned per source, with random phases and gains."""
    t = np.arange(n_samples) / sample_rate
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(tones))
    gains = rng.uniform(0.6, 1.0, size=len(tones))
    freqs = tones * 2.0 ** (detune / 12.0)
    return np.sum(gains[:, None] * np.sin(2.0 * np.pi * freqs[:, None] * t + phases[:, None]), 0)


def synth_dataset(spec: SynthSpec, out: Path | str) -> Manifest:
    """
    Write the synthetic WAV set and its manifest under ``out``.

    Returns:
        The manifest that was written to ``<out>/manifest.csv``.
    """
    root = Path(out)
    rng = np.random.default_rng(spec.seed)
    n_samples = round(spec.duration * spec.sample_rate)
    grid = tone_grid(spec.n_classes, spec.sample_rate)
    detunes = rng.uniform(-0.3, 0.3, size=(spec.n_classes, spec.sources_per_class))

    records: list[ManifestRecord] = []
    for label in range(spec.n_classes):
        for index in range(spec.samples_per_class):
            source = index % spec.sources_per_class
            clip = root / "audio" / f"class{label}" / f"c{label}_{index:05d}.wav"
            clean = base_signal(
                grid[label], float(detunes[label, source]), n_samples, spec.sample_rate, rng
            )
            reference = MIX_LEVEL * _unit_rms(clean)
            save_wav(clip, Waveform(samples=reference, sample_rate=spec.sample_rate))
            for view in spec.views:
                shaped = VIEW_TRANSFORMS[view](clean, spec.sample_rate)
                noise = rng.standard_normal(n_samples)
                mixed = MIX_LEVEL * mix_at_snr(shaped, noise, spec.snr[view])
                save_wav(
                    clip.with_name(f"{clip.stem}.{view.value}.wav"),
                    Waveform(samples=mixed, sample_rate=spec.sample_rate),
                )
            records.append(
                ManifestRecord(
                    path=clip,
                    label=label,
                    fold=source % spec.n_folds + 1,
                    source_id=f"c{label}s{source}",
                )
            )

    manifest = Manifest(
        records=tuple(records),
        class_names=tuple(f"class_{c}" for c in range(spec.n_classes)),
        n_folds=spec.n_folds,
    )
    save_manifest(root / MANIFEST_NAME, manifest)
    logger.info(
        "Synthesized %d clips (%d classes, views=%s) under %s",
        len(records),
        spec.n_classes,
        ",".join(v.value for v in spec.views),
        root,
    )
    return manifest
