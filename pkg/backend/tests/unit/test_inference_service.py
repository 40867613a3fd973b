"""
Unit tests for file-level inference, fusion and evaluation.

Network tests use the reduced three-class mel + raw configuration with
random feature matrices standing in for extracted clips.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import pytest

from exceptions import InvalidArgumentError
from models.features import ViewKind
from models.training import CheckpointMeta, EnsembleWeights
from networks import build_multiview, build_single_view
from services.feature_service import ClipFeatures
from services.inference_service import (
    LATE_BRANCH,
    clip_segments,
    evaluate_predictions,
    infer_file,
    late_fusion,
    late_predictions,
    predict,
    restore_network,
    self_ensemble,
    view_batch,
)

if TYPE_CHECKING:
    from models.network import NetworkConfig

# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _clip(rng: np.random.Generator, seconds: int = 2, name: str = "clip") -> ClipFeatures:
    return ClipFeatures(
        path=Path(f"{name}.wav"),
        views={
            ViewKind.MEL: rng.normal(size=(20 * seconds, 16)).astype(np.float32),
            ViewKind.RAW: (0.1 * rng.normal(size=(4096 * seconds, 1))).astype(np.float32),
        },
        sample_rate=4096,
        duration=float(seconds),
    )


def _agreeing_probs(
    rng: np.random.Generator, branches: list[str], winner: int
) -> dict[str, np.ndarray]:
    probs: dict[str, np.ndarray] = {}
    for branch in branches:
        p = rng.uniform(0.0, 1.0, size=5)
        p[winner] = p.max() + rng.uniform(0.01, 1.0)
        probs[branch] = p / p.sum()
    return probs


BRANCHES = ["mel", "gam", "cqt", "raw", "joint"]


# =============================================================================
# Self-ensemble and late fusion
# =============================================================================


class TestSelfEnsemble:
    def test_agreeing_branches_fix_the_label(self) -> None:
        rng = np.random.default_rng(99)
        for trial in range(1000):
            winner = trial % 5
            probs = _agreeing_probs(rng, BRANCHES, winner)
            weights = EnsembleWeights(
                weights=dict(zip(BRANCHES, rng.uniform(0.01, 1.0, size=5), strict=True))
            )

            _, label = self_ensemble(probs, weights)

            assert label == winner

    def test_single_weighted_branch(self, rng: np.random.Generator) -> None:
        probs = {b: rng.dirichlet(np.ones(4), size=6) for b in BRANCHES}
        weights = EnsembleWeights(weights={b: float(b == "mel") for b in BRANCHES})

        _, labels = self_ensemble(probs, weights)

        np.testing.assert_array_equal(labels, np.argmax(probs["mel"], axis=-1))

    def test_weighted_mean_over_branches(self) -> None:
        probs = {"mel": np.array([0.8, 0.2]), "joint": np.array([0.2, 0.8])}
        weights = EnsembleWeights(weights={"mel": 0.25, "joint": 0.75})

        fused, label = self_ensemble(probs, weights)

        np.testing.assert_allclose(fused, [(0.2 + 0.15) / 2, (0.05 + 0.6) / 2])
        assert label == 1

    def test_unweighted_branches_are_ignored(self) -> None:
        probs = {"mel": np.array([0.9, 0.1]), "raw": np.array([0.0, 1.0])}
        weights = EnsembleWeights(weights={"mel": 1.0})

        fused, _ = self_ensemble(probs, weights)

        np.testing.assert_allclose(fused, [0.9, 0.1])

    def test_no_overlapping_branch(self) -> None:
        with pytest.raises(InvalidArgumentError, match="has predictions"):
            self_ensemble({"mel": np.ones(2)}, EnsembleWeights(weights={"raw": 1.0}))


class TestLateFusion:
    def test_plurality_of_confident_models(self) -> None:
        votes = [np.eye(3)[c] for c in (1, 1, 1, 0, 0)]

        fused = late_fusion(votes)

        np.testing.assert_allclose(fused, [0.4, 0.6, 0.0])
        assert int(np.argmax(fused)) == 1

    def test_mean_of_stacks(self, rng: np.random.Generator) -> None:
        a = rng.dirichlet(np.ones(3), size=4)
        b = rng.dirichlet(np.ones(3), size=4)

        np.testing.assert_allclose(late_fusion([a, b]), (a + b) / 2)

    def test_no_models(self) -> None:
        with pytest.raises(InvalidArgumentError, match="at least one model"):
            late_fusion([])


# =============================================================================
# Evaluation
# =============================================================================


class TestEvaluatePredictions:
    def test_accuracy_and_confusion(self) -> None:
        labels = np.array([0, 0, 1, 1, 2, 2, 0, 1])
        predicted = np.array([0, 0, 1, 1, 2, 2, 1, 2])
        probs = {"mel": np.eye(3)[predicted] * 0.8 + 0.2 / 3}

        report = evaluate_predictions(probs, labels, 3)

        assert report.n_files == 8
        assert report.accuracy("mel") == pytest.approx(0.75)
        assert report.confusion["mel"] == [[2, 1, 0], [0, 2, 1], [0, 0, 2]]
        assert report.ensemble_accuracy is None

    def test_loss_is_mean_cross_entropy(self) -> None:
        probs = {"joint": np.array([[0.5, 0.5], [0.25, 0.75]])}

        report = evaluate_predictions(probs, [0, 1], 2)

        assert report.branch_losses["joint"] == pytest.approx(
            -(np.log(0.5) + np.log(0.75)) / 2
        )

    def test_ensemble_accuracy(self) -> None:
        probs = {"mel": np.array([[0.9, 0.1], [0.6, 0.4]]), "raw": np.array([[0.2, 0.8]] * 2)}
        weights = EnsembleWeights(weights={"mel": 0.5, "raw": 0.5})

        report = evaluate_predictions(probs, [0, 1], 2, ensemble=weights)

        # mel dominates the first clip, raw the second
        assert report.ensemble_accuracy == pytest.approx(1.0)

    def test_empty_test_set(self) -> None:
        with pytest.raises(InvalidArgumentError, match="empty test set"):
            evaluate_predictions({"mel": np.zeros((0, 3))}, [], 3)


# =============================================================================
# Network inference
# =============================================================================


class TestSegmentsAndBatches:
    def test_one_segment_per_second(
        self, reduced_config: NetworkConfig, rng: np.random.Generator
    ) -> None:
        segments = clip_segments(_clip(rng, seconds=3), reduced_config, reduced_config.views)

        assert len(segments[ViewKind.MEL]) == 3
        assert len(segments[ViewKind.RAW]) == 3
        assert segments[ViewKind.MEL][0].shape == (16, 16)
        assert segments[ViewKind.RAW][0].shape == (4096, 1)

    def test_batch_layout(self, rng: np.random.Generator) -> None:
        mel = view_batch(ViewKind.MEL, [rng.normal(size=(16, 16))] * 2)
        raw = view_batch(ViewKind.RAW, [rng.normal(size=(4096, 1))] * 2)

        assert mel.shape == (2, 16, 16, 1)
        assert raw.shape == (2, 4096)


class TestPredict:
    def test_distributions_per_branch(
        self, reduced_config: NetworkConfig, rng: np.random.Generator
    ) -> None:
        net = build_multiview(reduced_config, seed=1)
        clips = [_clip(rng, name=f"c{i}") for i in range(3)]

        probs = predict(net, clips, batch_size=4)

        assert set(probs) == {"mel", "raw", "joint"}
        for branch_probs in probs.values():
            assert branch_probs.shape == (3, 3)
            np.testing.assert_allclose(branch_probs.sum(axis=1), 1.0)

    def test_batch_size_does_not_matter(
        self, reduced_config: NetworkConfig, rng: np.random.Generator
    ) -> None:
        net = build_multiview(reduced_config, seed=1)
        clips = [_clip(rng, seconds=s, name=f"c{s}") for s in (1, 2, 3)]

        small = predict(net, clips, batch_size=1)
        large = predict(net, clips, batch_size=64)

        for branch in small:
            np.testing.assert_allclose(small[branch], large[branch], atol=1e-10)

    def test_infer_file_matches_predict(
        self, reduced_config: NetworkConfig, rng: np.random.Generator
    ) -> None:
        net = build_multiview(reduced_config, seed=2)
        clip = _clip(rng)

        single = infer_file(net, clip)
        pooled = predict(net, [_clip(rng, name="other"), clip], batch_size=3)

        for branch, probs in single.items():
            assert probs.shape == (3,)
            np.testing.assert_allclose(probs, pooled[branch][1], atol=1e-10)

    def test_no_clips(self, reduced_config: NetworkConfig) -> None:
        with pytest.raises(InvalidArgumentError, match="empty set of clips"):
            predict(build_multiview(reduced_config), [])


class TestRestoreAndLateFusion:
    def test_restored_multiview_predicts_identically(
        self, reduced_config: NetworkConfig, rng: np.random.Generator
    ) -> None:
        trained = build_multiview(reduced_config, seed=5)
        meta = CheckpointMeta(network=reduced_config, mode="blend")
        clips = [_clip(rng)]

        restored = restore_network(meta, trained.state_dict())

        for branch, probs in predict(trained, clips).items():
            np.testing.assert_array_equal(predict(restored, clips)[branch], probs)

    def test_restored_single_view(
        self, reduced_config: NetworkConfig, rng: np.random.Generator
    ) -> None:
        trained = build_single_view(reduced_config, ViewKind.RAW, seed=5)
        raw_only = reduced_config.with_views((ViewKind.RAW,))
        meta = CheckpointMeta(network=raw_only, mode="single:raw")

        restored = restore_network(meta, trained.state_dict())

        assert restored.branches == ("raw",)
        clip = _clip(rng)
        np.testing.assert_array_equal(
            infer_file(restored, clip)["raw"], infer_file(trained, clip)["raw"]
        )

    def test_late_predictions_average_models(
        self, reduced_config: NetworkConfig, rng: np.random.Generator
    ) -> None:
        views = (ViewKind.MEL, ViewKind.RAW)
        nets = [build_single_view(reduced_config, v, seed=i) for i, v in enumerate(views)]
        clips = [_clip(rng, name="a"), _clip(rng, name="b")]

        result = late_predictions(nets, clips)

        assert set(result) == {"mel", "raw", LATE_BRANCH}
        np.testing.assert_allclose(result[LATE_BRANCH], (result["mel"] + result["raw"]) / 2)
