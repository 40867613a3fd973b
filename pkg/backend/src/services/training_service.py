"""
Training engine.

One optimization step forwards every branch on a minibatch, combines the
branch cross-entropies with the blend weights in force and applies one Adam
update. At every evaluation the branch losses are measured on a fixed
training subset and on the validation set, the blender recomputes the
weights, a metrics row and one weight row per branch are logged, and the
checkpoint is replaced when the primary branch's validation accuracy
strictly improves.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from autodiff import Tape, Tensor, ops
from dsp import segment
from exceptions import DivergenceError, NonFiniteGradientError
from models.blending import BlendWeights
from models.features import SegmentSpec, ViewKind
from models.network import JOINT_BRANCH, NetworkConfig
from models.training import (
    CheckpointMeta,
    EnsembleWeights,
    TrainMode,
    TrainModeKind,
    TrainResult,
)
from networks import build_multiview, build_single_view
from repositories.checkpoint import CheckpointRepository
from repositories.logs import METRICS_FILE, WEIGHTS_FILE, MetricsRepository, WeightLogRepository
from schemas.logs import MetricsRow, WeightRow
from services.blending_service import GradientBlender, blended_loss, branch_loss, one_hot
from services.inference_service import predict, self_ensemble, view_batch
from services.optimizer import Adam, lr_at
from services.split_service import training_subset

if TYPE_CHECKING:
    from collections.abc import Sequence

    from config import TrainConfig
    from models.dataset import Split
    from networks import ViewNet
    from services.feature_service import ClipFeatures, FeatureService

logger = logging.getLogger(__name__)


# =============================================================================
# Setup helpers
# =============================================================================


def network_config(
    cfg: TrainConfig, n_classes: int, views: Sequence[ViewKind]
) -> NetworkConfig:
    """Network preset named by ``cfg.scale``."""
    if cfg.scale == "reduced":
        return NetworkConfig.reduced(n_classes, tuple(views), dropout=cfg.dropout)
    return NetworkConfig.paper(n_classes, tuple(views), dropout=cfg.dropout)


def build_for_mode(net_cfg: NetworkConfig, mode: TrainMode, seed: int) -> ViewNet:
    if mode.view is not None:
        return build_single_view(net_cfg, mode.view, seed)
    return build_multiview(net_cfg, seed)


def blender_for_mode(branches: Sequence[str], mode: TrainMode, cfg: TrainConfig) -> GradientBlender:
    """
    Adaptive blender for blend mode; fixed weights otherwise.

    Concatenation fusion puts all weight on the joint branch; single-view
    training has only its own branch.
    """
    common = {"window": cfg.smoothing_window, "epsilon": cfg.weight_floor}
    if mode.kind is TrainModeKind.BLEND:
        return GradientBlender(branches, adaptive=True, **common)
    active = JOINT_BRANCH if mode.kind is TrainModeKind.CONCAT else branches[0]
    return GradientBlender(
        branches, adaptive=False, fixed=BlendWeights.only(tuple(branches), active), **common
    )


def assemble_batch(
    clips: Sequence[ClipFeatures],
    labels: Sequence[int],
    net_cfg: NetworkConfig,
    views: Sequence[ViewKind],
    rng: np.random.Generator,
) -> tuple[dict[ViewKind, np.ndarray], np.ndarray]:
    """
    One random crop per clip, cut at the same relative position in every view.
    """
    positions = rng.uniform(0.0, 1.0, size=len(clips))
    inputs: dict[ViewKind, np.ndarray] = {}
    for view in views:
        spec = SegmentSpec(view=view, length=net_cfg.input_length(view))
        crops = [
            segment(clip.views[view], spec, "train", position=float(position))[0]
            for clip, position in zip(clips, positions, strict=True)
        ]
        inputs[view] = view_batch(view, crops)
    return inputs, one_hot(labels, net_cfg.n_classes)


# =============================================================================
# Trainer
# =============================================================================


@dataclass
class _Selection:
    accuracy: float = -1.0
    loss: float = math.inf
    epoch: int = 0
    step: int = 0
    ensemble: EnsembleWeights | None = None
    paths: list[str] = field(default_factory=list)


class Trainer:
    """
    Runs one training session of a single network.

    Late fusion is a sequence of single-view sessions; see ``train``.
    """

    def __init__(
        self,
        net: ViewNet,
        cfg: TrainConfig,
        mode: TrainMode,
        features: FeatureService,
        out_dir: Path | str,
        class_names: Sequence[str] = (),
        fold: int | None = None,
    ) -> None:
        self.net = net
        self.cfg = cfg
        self.mode = mode
        self.features = features
        self.out_dir = Path(out_dir)
        self.class_names = tuple(class_names)
        self.fold = fold
        self.branches = net.branches
        self.primary = mode.primary_branch
        self.blender = blender_for_mode(self.branches, mode, cfg)
        self.optimizer = Adam(net.parameters())
        self.checkpoints = CheckpointRepository(self.out_dir)
        self.metrics = MetricsRepository(self.out_dir / METRICS_FILE)
        self.weight_log = WeightLogRepository(self.out_dir / WEIGHTS_FILE)
        self._data_rng = np.random.default_rng([cfg.seed, 1])
        self._dropout_rng = np.random.default_rng([cfg.seed, 2])
        self._selection = _Selection()

    # -------------------------------------------------------------------------
    # Steps
    # -------------------------------------------------------------------------

    def train_step(
        self, inputs: dict[ViewKind, np.ndarray], targets: np.ndarray, lr: float
    ) -> float:
        """
        Forward, blended loss, backward and one Adam update.

        Raises:
            DivergenceError: If the blended loss or a gradient is non-finite.
        """
        with Tape() as tape:
            output = self.net(inputs, train=True, rng=self._dropout_rng)
            target = Tensor(targets)
            losses: dict[str, Tensor] = {
                branch: ops.softmax_cross_entropy(output.logits[branch], target)
                for branch in self.branches
            }
            total = blended_loss(losses, self.blender.weights)
        value = total.item()
        step = self.optimizer.state.step + 1
        if not math.isfinite(value):
            self._diverged(step, {b: loss.item() for b, loss in losses.items()})
        grads = tape.backward(total).for_parameters(self.optimizer.params)
        try:
            self.optimizer.step(grads, lr)
        except NonFiniteGradientError as e:
            logger.error("Non-finite gradient at step %d: %s", step, e.parameter)
            raise DivergenceError(step, {b: loss.item() for b, loss in losses.items()}) from e
        return value

    def _diverged(self, step: int, losses: dict[str, float]) -> None:
        logger.error(
            "Training diverged at step %d: %s",
            step,
            ", ".join(f"{b}={v!r}" for b, v in losses.items()),
        )
        raise DivergenceError(step, losses)

    # -------------------------------------------------------------------------
    # Evaluation
    # -------------------------------------------------------------------------

    def _branch_losses(
        self, clips: Sequence[ClipFeatures], labels: Sequence[int]
    ) -> tuple[dict[str, float], dict[str, np.ndarray]]:
        probs = predict(self.net, clips)
        targets = one_hot(labels, self.net.cfg.n_classes)
        return {b: branch_loss(probs[b], targets) for b in self.branches}, probs

    def evaluate(
        self,
        *,
        epoch: int,
        step: int,
        lr: float,
        blended: float,
        subset: tuple[Sequence[ClipFeatures], Sequence[int]],
        validation: tuple[Sequence[ClipFeatures], Sequence[int]],
    ) -> MetricsRow:
        train_losses, _ = self._branch_losses(*subset)
        val_losses, val_probs = self._branch_losses(*validation)
        all_losses = {**{f"train/{k}": v for k, v in train_losses.items()}, **val_losses}
        if not all(math.isfinite(v) for v in all_losses.values()):
            self._diverged(step, all_losses)

        truth = np.asarray(validation[1])
        val_acc = {
            b: float(np.mean(np.argmax(val_probs[b], axis=-1) == truth)) for b in self.branches
        }
        weights = self.blender.update(train_losses, val_losses)
        ensemble = EnsembleWeights(weights=dict(weights.weights), epoch=epoch, step=step)
        ensemble_acc = None
        if self.mode.is_multiview:
            _, fused = self_ensemble(val_probs, ensemble)
            ensemble_acc = float(np.mean(fused == truth))

        row = MetricsRow(
            step=step,
            epoch=epoch,
            lr=lr,
            blended_loss=blended,
            ensemble_val_acc=ensemble_acc,
            train_loss=train_losses,
            val_loss=val_losses,
            val_acc=val_acc,
        )
        self.metrics.append(row)
        for result in self.blender.last_update:
            self.weight_log.append(
                WeightRow(
                    step=step,
                    epoch=epoch,
                    branch=result.branch,
                    raw_w=result.weight,
                    normalized_w=weights.of(result.branch),
                    G=result.measures.generalization,
                    O=result.measures.overfitting,
                    smoothed_train_loss=result.smoothed_train,
                    smoothed_true_loss=result.smoothed_true,
                )
            )
            logger.info(
                "[EVAL] epoch=%d step=%d branch=%s w=%.4f val_loss=%.4f val_acc=%.4f",
                epoch,
                step,
                result.branch,
                weights.of(result.branch),
                val_losses[result.branch],
                val_acc[result.branch],
            )

        if val_acc[self.primary] > self._selection.accuracy:
            self._select(epoch, step, val_acc[self.primary], val_losses[self.primary], ensemble)
        return row

    def _select(
        self, epoch: int, step: int, accuracy: float, loss: float, ensemble: EnsembleWeights
    ) -> None:
        meta = CheckpointMeta(
            network=self.net.cfg,
            train_config=self.cfg.model_dump(mode="json"),
            mode=str(self.mode),
            class_names=self.class_names,
            blend_weights=self.blender.weights,
            ensemble_weights=ensemble,
            best_val_accuracy=accuracy,
            best_val_loss=loss,
            step=step,
            epoch=epoch,
            blender_state=self.blender.state(),
        )
        arrays = {**self.net.state_dict(), **self.optimizer.state.to_arrays()}
        path = self.checkpoints.save(meta, arrays)
        self._selection = _Selection(
            accuracy=accuracy,
            loss=loss,
            epoch=epoch,
            step=step,
            ensemble=ensemble,
            paths=[str(path)],
        )
        logger.info("New best %s accuracy %.4f at epoch %d", self.primary, accuracy, epoch)

    # -------------------------------------------------------------------------
    # Loop
    # -------------------------------------------------------------------------

    def _eval_due(self, step: int, epoch: int, end_of_epoch: bool) -> bool:
        if self.cfg.eval_interval_steps is not None:
            return step % self.cfg.eval_interval_steps == 0
        return end_of_epoch and epoch % self.cfg.eval_interval == 0

    def fit(self, split: Split) -> TrainResult:
        """
        Train on ``split.train``, selecting on ``split.validation``.

        Raises:
            DivergenceError: If a loss or gradient becomes non-finite.
        """
        cfg = self.cfg
        views = self.net.views
        for stale in (self.metrics.path, self.weight_log.path):
            stale.unlink(missing_ok=True)

        subset_records = training_subset(split.train, len(split.validation), cfg.seed)
        train_clips = self.features.extract_all(split.train)
        train_labels = [r.label for r in split.train]
        subset = (self.features.extract_all(subset_records), [r.label for r in subset_records])
        validation = (
            self.features.extract_all(split.validation),
            [r.label for r in split.validation],
        )
        logger.info(
            "Training %s: %d train, %d subset, %d validation, %d epochs",
            self.mode,
            len(train_clips),
            len(subset_records),
            len(validation[0]),
            cfg.epochs,
        )

        step = 0
        last_eval = 0
        pending: list[float] = []
        lr = lr_at(1, cfg)
        for epoch in range(1, cfg.epochs + 1):
            lr = lr_at(epoch, cfg)
            order = self._data_rng.permutation(len(train_clips))
            batches = [order[i : i + cfg.batch_size] for i in range(0, len(order), cfg.batch_size)]
            for number, batch in enumerate(batches, start=1):
                inputs, targets = assemble_batch(
                    [train_clips[i] for i in batch],
                    [train_labels[i] for i in batch],
                    self.net.cfg,
                    views,
                    self._data_rng,
                )
                pending.append(self.train_step(inputs, targets, lr))
                step += 1
                logger.debug("step=%d epoch=%d loss=%.6f", step, epoch, pending[-1])
                if self._eval_due(step, epoch, number == len(batches)):
                    self.evaluate(
                        epoch=epoch,
                        step=step,
                        lr=lr,
                        blended=math.fsum(pending) / len(pending),
                        subset=subset,
                        validation=validation,
                    )
                    pending.clear()
                    last_eval = step

        if last_eval != step:
            self.evaluate(
                epoch=cfg.epochs,
                step=step,
                lr=lr,
                blended=math.fsum(pending) / len(pending),
                subset=subset,
                validation=validation,
            )

        best = self._selection
        return TrainResult(
            mode=str(self.mode),
            fold=self.fold,
            steps=step,
            epochs=cfg.epochs,
            best_epoch=best.epoch,
            best_step=best.step,
            best_val_accuracy=max(best.accuracy, 0.0),
            best_val_loss=best.loss,
            ensemble_weights=best.ensemble or EnsembleWeights(weights=self.blender.weights.weights),
            checkpoint_paths=best.paths,
        )


# =============================================================================
# Entry point
# =============================================================================


def train(
    split: Split,
    cfg: TrainConfig,
    mode: TrainMode,
    features: FeatureService,
    out_dir: Path | str,
    class_names: Sequence[str],
    fold: int | None = None,
) -> list[TrainResult]:
    """
    Train the network(s) of ``mode``.

    Late fusion trains one single-view network per view of ``features``,
    each into its own sub-directory; every other mode trains one network.
    """
    out = Path(out_dir)
    n_classes = len(class_names)
    if mode.kind is TrainModeKind.LATE:
        results = []
        for view in features.views:
            single = TrainMode(kind=TrainModeKind.SINGLE, view=view)
            net_cfg = network_config(cfg, n_classes, (view,))
            trainer = Trainer(
                build_for_mode(net_cfg, single, cfg.seed),
                cfg,
                single,
                features,
                out / view.value,
                class_names,
                fold,
            )
            results.append(trainer.fit(split))
        return results

    views = (mode.view,) if mode.view is not None else features.views
    net_cfg = network_config(cfg, n_classes, views)
    trainer = Trainer(
        build_for_mode(net_cfg, mode, cfg.seed), cfg, mode, features, out, class_names, fold
    )
    return [trainer.fit(split)]

