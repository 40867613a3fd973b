"""
File-level inference, self-ensemble, late fusion and evaluation.

A clip of S seconds is cut into S evenly spaced segments per view (the same
relative offsets in every view); each branch's class distribution for the
clip is the mean of its segment distributions.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from config import get_settings
from dsp import segment, segments_for_duration
from exceptions import InvalidArgumentError
from models.features import SegmentSpec, ViewKind
from models.training import EvalReport, TrainMode
from networks import build_multiview, build_single_view, softmax_rows
from services.blending_service import branch_loss, one_hot

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from models.network import NetworkConfig
    from models.training import CheckpointMeta, EnsembleWeights
    from networks import ViewNet
    from services.feature_service import ClipFeatures

logger = logging.getLogger(__name__)

LATE_BRANCH = "late"


# =============================================================================
# Batching
# =============================================================================


def view_batch(view: ViewKind, segments: Sequence[np.ndarray]) -> np.ndarray:
    """Stack segments into the batched network layout of ``view``."""
    stacked = np.stack([np.asarray(s, dtype=np.float64) for s in segments])
    if view is ViewKind.RAW:
        return stacked[..., 0]
    return stacked[..., None]


def clip_segments(
    features: ClipFeatures, cfg: NetworkConfig, views: Sequence[ViewKind]
) -> dict[ViewKind, list[np.ndarray]]:
    """
    S evenly spaced segments of every view, S being the clip length in seconds.

    Raises:
        SignalTooShortError: If a view is shorter than one segment.
    """
    count = segments_for_duration(features.duration)
    return {
        view: segment(
            features.views[view],
            SegmentSpec(view=view, length=cfg.input_length(view)),
            "infer",
            n_segments=count,
        )
        for view in views
    }


def predict(
    net: ViewNet,
    clips: Sequence[ClipFeatures],
    batch_size: int | None = None,
) -> dict[str, np.ndarray]:
    """
    Clip-level class distributions of every branch, shape (M, C).

    Segments of all clips are pooled into forward batches of ``batch_size``
    (``Settings.eval_batch_size`` by default) and averaged back per clip.
    """
    if not clips:
        msg = "cannot predict an empty set of clips"
        raise InvalidArgumentError(msg)
    size = batch_size or get_settings().eval_batch_size
    views = net.views
    cfg = net.cfg

    pooled: dict[ViewKind, list[np.ndarray]] = {v: [] for v in views}
    owners: list[int] = []
    for index, clip in enumerate(clips):
        per_view = clip_segments(clip, cfg, views)
        for view in views:
            pooled[view].extend(per_view[view])
        owners.extend([index] * len(per_view[views[0]]))

    chunks: dict[str, list[np.ndarray]] = {}
    for start in range(0, len(owners), size):
        inputs = {v: view_batch(v, pooled[v][start : start + size]) for v in views}
        output = net(inputs, train=False)
        for branch, logits in output.logits.items():
            chunks.setdefault(branch, []).append(softmax_rows(logits.data))

    owner_index = np.asarray(owners)
    counts = np.bincount(owner_index, minlength=len(clips)).astype(np.float64)
    result: dict[str, np.ndarray] = {}
    for branch, parts in chunks.items():
        segment_probs = np.concatenate(parts, axis=0)
        sums = np.zeros((len(clips), segment_probs.shape[1]))
        np.add.at(sums, owner_index, segment_probs)
        result[branch] = sums / counts[:, None]
    return result


def infer_file(net: ViewNet, clip: ClipFeatures) -> dict[str, np.ndarray]:
    """Class distribution of every branch for one clip, each of shape (C,)."""
    return {branch: probs[0] for branch, probs in predict(net, [clip]).items()}


# =============================================================================
# Fusion
# =============================================================================


def self_ensemble(
    branch_probs: Mapping[str, np.ndarray], weights: EnsembleWeights
) -> tuple[np.ndarray, np.ndarray]:
    """
    Weighted self-ensemble ``(1/K) sum_k w_k P_k`` over the K weighted branches.

    Works on single distributions (C,) or stacks (M, C). The result is left
    unnormalized; labels are the argmax with ties going to the lowest class.
    """
    branches = [b for b in weights.branches if b in branch_probs]
    if not branches:
        msg = f"no branch of {weights.branches} has predictions"
        raise InvalidArgumentError(msg)
    total = sum(weights.weights[b] * np.asarray(branch_probs[b]) for b in branches)
    fused = np.asarray(total) / len(branches)
    return fused, np.argmax(fused, axis=-1)


def late_fusion(distributions: Sequence[np.ndarray]) -> np.ndarray:
    """Unweighted mean of independently trained models' distributions."""
    if not distributions:
        msg = "late fusion needs at least one model"
        raise InvalidArgumentError(msg)
    return np.mean(np.stack([np.asarray(d) for d in distributions]), axis=0)


# =============================================================================
# Evaluation
# =============================================================================


def _confusion(labels: np.ndarray, predicted: np.ndarray, n_classes: int) -> list[list[int]]:
    matrix = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(matrix, (labels, predicted), 1)
    return matrix.tolist()


def evaluate_predictions(
    branch_probs: Mapping[str, np.ndarray],
    labels: Sequence[int] | np.ndarray,
    n_classes: int,
    ensemble: EnsembleWeights | None = None,
) -> EvalReport:
    """
    File-level accuracy, loss and confusion counts of every branch.

    Raises:
        InvalidArgumentError: If the test set is empty.
    """
    truth = np.asarray(labels, dtype=np.int64)
    if truth.size == 0:
        msg = "cannot evaluate an empty test set"
        raise InvalidArgumentError(msg)
    targets = one_hot(truth, n_classes)
    losses: dict[str, float] = {}
    accuracies: dict[str, float] = {}
    confusion: dict[str, list[list[int]]] = {}
    for branch, probs in branch_probs.items():
        predicted = np.argmax(probs, axis=-1)
        losses[branch] = branch_loss(probs, targets)
        accuracies[branch] = float(np.mean(predicted == truth))
        confusion[branch] = _confusion(truth, predicted, n_classes)
    ensemble_accuracy = None
    if ensemble is not None:
        _, fused_labels = self_ensemble(branch_probs, ensemble)
        ensemble_accuracy = float(np.mean(fused_labels == truth))
    return EvalReport(
        n_files=int(truth.size),
        n_classes=n_classes,
        branch_losses=losses,
        branch_accuracies=accuracies,
        ensemble_accuracy=ensemble_accuracy,
        confusion=confusion,
    )


def restore_network(meta: CheckpointMeta, arrays: Mapping[str, np.ndarray]) -> ViewNet:
    """Rebuild the network a checkpoint was trained with and load its tensors."""
    mode = TrainMode.parse(meta.mode)
    if mode.view is not None:
        net: ViewNet = build_single_view(meta.network, mode.view)
    else:
        net = build_multiview(meta.network)
    net.load_state_dict(dict(arrays))
    return net


def late_predictions(
    nets: Sequence[ViewNet], clips: Sequence[ClipFeatures]
) -> dict[str, np.ndarray]:
    """Per-model distributions keyed by view plus their unweighted mean."""
    result: dict[str, np.ndarray] = {}
    for net in nets:
        result.update(predict(net, clips))
    result[LATE_BRANCH] = late_fusion(list(result.values()))
    return result
