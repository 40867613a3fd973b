"""
Unit tests for the domain models: views, manifests, split rules, synthetic
dataset specs, training modes and report bounds.

Covers validation rules and parsing that are not exercised by the service
tests.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from exceptions import ConfigurationError
from models.blending import BlendWeights, BranchLedger
from models.dataset import Manifest, ManifestRecord, Split, SplitRule, SplitSpec, SynthSpec
from models.features import ALL_VIEWS, SpectrogramConfig, ViewKind, Waveform
from models.network import JOINT_BRANCH
from models.training import EnsembleWeights, EvalReport, TrainMode, TrainModeKind

# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _record(index: int, label: int, fold: int = 1, source: str | None = None) -> ManifestRecord:
    return ManifestRecord(
        path=Path(f"audio/c{label}_{index:03d}.wav"),
        label=label,
        fold=fold,
        source_id=source or f"c{label}s{index}",
    )


def _manifest(**kwargs: object) -> Manifest:
    defaults: dict = {
        "records": (_record(0, 0), _record(1, 1, fold=2)),
        "class_names": ("dog", "rain"),
        "n_folds": 2,
    }
    defaults.update(kwargs)
    return Manifest(**defaults)


# ---------------------------------------------------------------------------
# Views and audio
# ---------------------------------------------------------------------------


class TestViewKind:
    @pytest.mark.parametrize(
        ("text", "expected"),
        [
            ("mel", ViewKind.MEL),
            ("GAM", ViewKind.GAMMATONE),
            ("gammatone", ViewKind.GAMMATONE),
            (" cqt ", ViewKind.CQT),
            ("waveform", ViewKind.RAW),
        ],
    )
    def test_parse(self, text: str, expected: ViewKind) -> None:
        assert ViewKind.parse(text) is expected

    def test_unknown_view_is_a_config_error(self) -> None:
        with pytest.raises(ConfigurationError, match="unknown view"):
            ViewKind.parse("chroma")

    def test_cache_codes_round_trip(self) -> None:
        for view in ALL_VIEWS:
            assert ViewKind.from_cache_code(view.cache_code) is view

    def test_spectral_flag(self) -> None:
        assert [v.is_spectral for v in ALL_VIEWS] == [True, True, True, False]


class TestWaveform:
    def test_duration(self) -> None:
        assert Waveform(samples=np.zeros(16000), sample_rate=8000).duration == 2.0

    def test_rejects_multichannel(self) -> None:
        with pytest.raises(ValidationError, match="mono"):
            Waveform(samples=np.zeros((10, 2)), sample_rate=8000)

    def test_spectrogram_config_geometry(self) -> None:
        cfg = SpectrogramConfig(view_kind=ViewKind.MEL)
        assert cfg.window_samples(44100) == 1764
        assert cfg.hop_samples(44100) == 882
        assert cfg.fft_size(44100) == 2048

    def test_spectrogram_config_needs_spectral_view(self) -> None:
        with pytest.raises(ValidationError):
            SpectrogramConfig(view_kind=ViewKind.RAW)


# ---------------------------------------------------------------------------
# Manifests and splits
# ---------------------------------------------------------------------------


class TestManifest:
    def test_fold_selection(self) -> None:
        manifest = _manifest()
        assert manifest.n_classes == 2
        assert len(manifest) == 2
        assert [r.label for r in manifest.fold(2)] == [1]

    def test_empty(self) -> None:
        with pytest.raises(ValidationError, match="no records"):
            _manifest(records=())

    def test_sparse_labels(self) -> None:
        with pytest.raises(ValidationError, match="dense"):
            _manifest(records=(_record(0, 0), _record(1, 2)), class_names=("a", "b", "c"))

    def test_fold_out_of_range(self) -> None:
        with pytest.raises(ValidationError, match="fold 3"):
            _manifest(records=(_record(0, 0), _record(1, 1, fold=3)))

    def test_duplicate_paths(self) -> None:
        with pytest.raises(ValidationError, match="duplicate"):
            _manifest(records=(_record(0, 0), _record(0, 0, fold=2), _record(1, 1)))


class TestSplitSpec:
    def test_parse(self) -> None:
        spec = SplitSpec.parse("sources_per_class:2", seed=4)
        assert spec.rule is SplitRule.SOURCES_PER_CLASS
        assert spec.value == 2.0
        assert spec.seed == 4

    def test_default_fraction(self) -> None:
        assert SplitSpec.parse("sample_fraction").value == 0.1

    def test_count_must_be_whole(self) -> None:
        with pytest.raises(ValidationError, match="whole count"):
            SplitSpec(rule=SplitRule.SOURCES_PER_CLASS, value=1.5)

    def test_fraction_bounds(self) -> None:
        with pytest.raises(ValidationError, match="fraction"):
            SplitSpec(rule=SplitRule.SOURCE_FRACTION, value=1.0)

    def test_unknown_rule(self) -> None:
        with pytest.raises(ConfigurationError, match="random"):
            SplitSpec.parse("random:0.2")

    def test_parse_rejects_bad_value(self) -> None:
        with pytest.raises(ConfigurationError, match="invalid split"):
            SplitSpec.parse("source_fraction:2")

    def test_partitions_must_be_disjoint(self) -> None:
        shared = _record(0, 0)
        with pytest.raises(ValidationError, match="overlap"):
            Split(train=(shared,), validation=(shared,), test=())


class TestSynthSpec:
    def test_defaults(self) -> None:
        spec = SynthSpec()
        assert spec.snr[ViewKind.GAMMATONE] == 0.0
        assert spec.n_samples == 800

    def test_missing_snr(self) -> None:
        with pytest.raises(ValidationError, match="no SNR"):
            SynthSpec(snr={ViewKind.MEL: 1.0})

    def test_negative_snr(self) -> None:
        with pytest.raises(ValidationError):
            SynthSpec(views=(ViewKind.MEL,), snr={ViewKind.MEL: -1.0})


# ---------------------------------------------------------------------------
# Training modes and reports
# ---------------------------------------------------------------------------


class TestTrainMode:
    @pytest.mark.parametrize(
        ("text", "kind", "view"),
        [
            ("blend", TrainModeKind.BLEND, None),
            ("multiview_concat", TrainModeKind.CONCAT, None),
            ("late", TrainModeKind.LATE, None),
            ("single:cqt", TrainModeKind.SINGLE, ViewKind.CQT),
            ("single_view:waveform", TrainModeKind.SINGLE, ViewKind.RAW),
        ],
    )
    def test_parse(self, text: str, kind: TrainModeKind, view: ViewKind | None) -> None:
        mode = TrainMode.parse(text)
        assert mode.kind is kind
        assert mode.view is view

    def test_primary_branch(self) -> None:
        assert TrainMode.parse("blend").primary_branch == JOINT_BRANCH
        assert TrainMode.parse("single:mel").primary_branch == "mel"
        assert TrainMode.parse("concat").is_multiview
        assert not TrainMode.parse("late").is_multiview

    def test_str_round_trip(self) -> None:
        assert str(TrainMode.parse("single:gam")) == "single:gam"

    @pytest.mark.parametrize("text", ["boost", "single", "blend:mel", "single:chroma"])
    def test_invalid(self, text: str) -> None:
        with pytest.raises(ConfigurationError):
            TrainMode.parse(text)


class TestWeightsAndReports:
    def test_uniform_weights(self) -> None:
        weights = BlendWeights.uniform(["mel", "raw", JOINT_BRANCH])
        assert weights.of("raw") == pytest.approx(1 / 3)
        assert weights.of("cqt") == 0.0
        assert weights.normalizer == 3.0

    def test_only(self) -> None:
        weights = BlendWeights.only(["mel", JOINT_BRANCH], JOINT_BRANCH)
        assert weights.weights == {"mel": 0.0, JOINT_BRANCH: 1.0}
        with pytest.raises(ValueError, match="not in"):
            BlendWeights.only(["mel"], "raw")

    def test_weights_must_sum_to_one(self) -> None:
        with pytest.raises(ValidationError, match="sum to 1"):
            BlendWeights(weights={"mel": 0.5, "raw": 0.6})

    def test_ledger_histories_equal_length(self) -> None:
        with pytest.raises(ValidationError, match="differ in length"):
            BranchLedger(branch="mel", train_losses=(1.0,), true_losses=())

    def test_ensemble_weights_non_negative(self) -> None:
        with pytest.raises(ValidationError):
            EnsembleWeights(weights={"mel": -0.1})

    def test_report_accuracy_bounds(self) -> None:
        with pytest.raises(ValidationError):
            EvalReport(n_files=4, n_classes=2, branch_accuracies={"mel": 1.5})
