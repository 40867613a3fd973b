"""
Unit tests for the synthetic dataset generator.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
import pytest

from dsp import extract_view, load_audio, view_audio_path
from exceptions import InvalidArgumentError
from models.dataset import SynthSpec
from models.features import ALL_VIEWS, SpectrogramConfig, ViewKind
from repositories.manifest import load_manifest
from services.synthesis_service import (
    LOWEST_TONE_HZ,
    MANIFEST_NAME,
    MIX_LEVEL,
    TONES_PER_CLASS,
    VIEW_TRANSFORMS,
    mix_at_snr,
    synth_dataset,
    tone_grid,
)

if TYPE_CHECKING:
    from pathlib import Path

    from models.dataset import Manifest


def _tiny_spec(seed: int = 0) -> SynthSpec:
    return SynthSpec(
        n_classes=2,
        views=(ViewKind.MEL, ViewKind.RAW),
        samples_per_class=4,
        sources_per_class=2,
        duration=0.25,
        sample_rate=8000,
        n_folds=2,
        seed=seed,
    )


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def _clip_features(manifest: Manifest, view: ViewKind) -> np.ndarray:
    """Time-averaged 8-band log spectrum of every clip's view companion."""
    cfg = SpectrogramConfig(view_kind=view, n_bands=8)
    rows = [
        extract_view(load_audio(view_audio_path(r.path, view)), view, cfg).mean(axis=0)
        for r in manifest.records
    ]
    return np.stack(rows)


def _linear_fit_accuracy(manifest: Manifest, view: ViewKind) -> float:
    """Least-squares one-vs-all classifier fit on fold 1, scored on fold 2."""
    features = _clip_features(manifest, view)
    features = (features - features.mean(axis=0)) / (features.std(axis=0) + 1e-9)
    design = np.hstack([features, np.ones((len(features), 1))])
    labels = np.array([r.label for r in manifest.records])
    train = np.array([r.fold == 1 for r in manifest.records])
    targets = np.eye(manifest.n_classes)[labels[train]]
    weights, *_ = np.linalg.lstsq(design[train], targets, rcond=None)
    predicted = np.argmax(design[~train] @ weights, axis=1)
    return float(np.mean(predicted == labels[~train]))


# =============================================================================
# Signal building blocks
# =============================================================================


class TestToneGrid:
    def test_shape_and_range(self) -> None:
        grid = tone_grid(4, 8000)

        assert grid.shape == (4, TONES_PER_CLASS)
        assert grid.min() == pytest.approx(LOWEST_TONE_HZ)
        assert grid.max() == pytest.approx(0.35 * 8000)

    def test_classes_interleave(self) -> None:
        grid = tone_grid(3, 8000)

        # column-major flattening walks the log-spaced grid in order
        assert np.all(np.diff(grid.T.ravel()) > 0)


class TestMixAtSnr:
    def test_power_split(self) -> None:
        signal = np.array([1.0, -1.0, 1.0, -1.0]) * 3.0
        noise = np.array([1.0, 1.0, -1.0, -1.0]) * 0.5

        mixed = mix_at_snr(signal, noise, 4.0)

        assert _rms(mixed) == pytest.approx(1.0)
        assert mixed @ (signal / 3.0) / 4 == pytest.approx(math.sqrt(0.8))
        assert mixed @ (noise / 0.5) / 4 == pytest.approx(math.sqrt(0.2))

    def test_zero_snr_is_pure_noise(self, rng: np.random.Generator) -> None:
        noise = rng.normal(size=64)

        mixed = mix_at_snr(rng.normal(size=64), noise, 0.0)

        np.testing.assert_allclose(mixed, noise / _rms(noise))

    def test_silent_signal_stays_silent(self) -> None:
        mixed = mix_at_snr(np.zeros(8), np.zeros(8), 1.0)

        np.testing.assert_array_equal(mixed, np.zeros(8))

    def test_negative_snr(self) -> None:
        with pytest.raises(InvalidArgumentError, match="SNR must be >= 0"):
            mix_at_snr(np.ones(4), np.ones(4), -1.0)


class TestViewTransforms:
    def test_every_view_has_a_transform(self) -> None:
        assert set(VIEW_TRANSFORMS) == set(ALL_VIEWS)

    @pytest.mark.parametrize("view", ALL_VIEWS)
    def test_length_preserved(self, view: ViewKind, rng: np.random.Generator) -> None:
        x = rng.normal(size=800)

        assert VIEW_TRANSFORMS[view](x, 8000).shape == x.shape

    def test_raw_view_is_passthrough(self, rng: np.random.Generator) -> None:
        x = rng.normal(size=100)

        assert VIEW_TRANSFORMS[ViewKind.RAW](x, 8000) is x


# =============================================================================
# Dataset writer
# =============================================================================


class TestSynthDataset:
    def test_manifest_written_and_reloadable(self, tmp_path: Path) -> None:
        manifest = synth_dataset(_tiny_spec(), tmp_path)

        assert len(manifest) == 8
        assert manifest.n_folds == 2
        assert load_manifest(tmp_path / MANIFEST_NAME) == manifest

    def test_folds_follow_sources(self, synth_manifest: Manifest) -> None:
        for record in synth_manifest.records:
            source = int(record.source_id.split("s")[1])
            assert record.fold == source % 3 + 1
            assert record.source_id.startswith(f"c{record.label}s")

    def test_every_fold_holds_every_class(self, synth_manifest: Manifest) -> None:
        for fold in range(1, synth_manifest.n_folds + 1):
            assert {r.label for r in synth_manifest.fold(fold)} == {0, 1, 2}

    def test_companions_for_requested_views(self, tmp_path: Path) -> None:
        manifest = synth_dataset(_tiny_spec(), tmp_path)
        clip = manifest.records[0].path

        assert view_audio_path(clip, ViewKind.MEL) == clip.with_name(f"{clip.stem}.mel.wav")
        assert view_audio_path(clip, ViewKind.RAW) == clip.with_name(f"{clip.stem}.raw.wav")
        assert view_audio_path(clip, ViewKind.CQT) == clip

    def test_levels(self, synth_manifest: Manifest) -> None:
        clip = synth_manifest.records[0].path
        reference = load_audio(clip)
        companion = load_audio(view_audio_path(clip, ViewKind.GAMMATONE))

        assert reference.sample_rate == 8000
        assert len(reference.samples) == 8000
        assert _rms(reference.samples) == pytest.approx(MIX_LEVEL, rel=1e-2)
        assert _rms(companion.samples) == pytest.approx(MIX_LEVEL, rel=0.1)

    def test_same_seed_same_files(self, tmp_path: Path) -> None:
        first = synth_dataset(_tiny_spec(seed=3), tmp_path / "a")
        second = synth_dataset(_tiny_spec(seed=3), tmp_path / "b")
        clip_a = view_audio_path(first.records[-1].path, ViewKind.MEL)
        clip_b = view_audio_path(second.records[-1].path, ViewKind.MEL)

        assert clip_a.read_bytes() == clip_b.read_bytes()

    def test_noise_view_carries_no_class_information(self, tmp_path: Path) -> None:
        spec = SynthSpec(
            n_classes=3,
            views=(ViewKind.MEL, ViewKind.GAMMATONE),
            samples_per_class=24,
            sources_per_class=6,
            duration=0.5,
            sample_rate=8000,
            n_folds=2,
            seed=4,
        )
        manifest = synth_dataset(spec, tmp_path)
        chance = 1.0 / spec.n_classes

        informative = _linear_fit_accuracy(manifest, ViewKind.MEL)
        noise = _linear_fit_accuracy(manifest, ViewKind.GAMMATONE)

        assert spec.snr[ViewKind.GAMMATONE] == 0.0
        assert informative >= 0.9
        assert noise <= chance + 0.25
