"""
Desk-scale blending experiment.

Generates one synthetic four-view dataset with a near-noise view, then trains
and tests blend, concat and every single-view mode over several seeds on the
same held-out fold. The outcome answers three questions: does blending match
or beat concatenation and the best single view, does it down-weight the noise
view, and does it select at a validation loss no worse than concatenation.
"""

from __future__ import annotations

import logging
from pathlib import Path
from statistics import fmean

from pydantic import BaseModel, ConfigDict, Field

from config import TrainConfig, get_settings
from models.dataset import DEFAULT_SNR, SplitSpec, SynthSpec
from models.features import ALL_VIEWS, ViewKind
from models.training import TrainMode
from services.evaluation_service import evaluate_checkpoint
from services.feature_service import FeatureService
from services.split_service import split
from services.synthesis_service import synth_dataset
from services.training_service import network_config, train

logger = logging.getLogger(__name__)

BLEND = "blend"
CONCAT = "concat"
NOISE_WEIGHT_LIMIT = 0.2
RESULT_NAME = "desk_result.json"


class DeskExperimentConfig(BaseModel):
    """Dataset and training settings of the experiment."""

    model_config = ConfigDict(frozen=True)

    n_classes: int = Field(default=4, ge=2)
    samples_per_class: int = Field(default=200, ge=1)
    sources_per_class: int = Field(default=10, ge=2)
    n_folds: int = Field(default=5, ge=2)
    duration: float = Field(default=1.0, gt=0.0)
    sample_rate: int = Field(default=8000, ge=1000)
    noise_view: ViewKind = ViewKind.GAMMATONE
    data_seed: int = Field(default=0, ge=0)
    seeds: tuple[int, ...] = (0, 1, 2)
    epochs: int = Field(default=40, ge=1)
    batch_size: int = Field(default=64, ge=1)
    warmup_epochs: int = Field(default=2, ge=0)
    validation: str = "sources_per_class:2"

    def synth_spec(self) -> SynthSpec:
        snr = dict(DEFAULT_SNR)
        snr[self.noise_view] = 0.0
        return SynthSpec(
            n_classes=self.n_classes,
            views=ALL_VIEWS,
            samples_per_class=self.samples_per_class,
            sources_per_class=self.sources_per_class,
            snr=snr,
            duration=self.duration,
            sample_rate=self.sample_rate,
            n_folds=self.n_folds,
            seed=self.data_seed,
        )

    def train_config(self, mode: str, seed: int) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            warmup_epochs=self.warmup_epochs,
            scale="reduced",
            mode=mode,
            views=tuple(v.value for v in ALL_VIEWS),
            seed=seed,
        )

    @property
    def modes(self) -> tuple[str, ...]:
        return (BLEND, CONCAT, *(f"single:{v.value}" for v in ALL_VIEWS))


class ModeOutcome(BaseModel):
    """Per-seed results of one training mode."""

    mode: str
    test_accuracies: list[float] = Field(default_factory=list)
    val_losses: list[float] = Field(default_factory=list)

    @property
    def mean_test_accuracy(self) -> float:
        return fmean(self.test_accuracies)

    @property
    def mean_val_loss(self) -> float:
        return fmean(self.val_losses)


class DeskExperimentResult(BaseModel):
    """Outcomes of every mode plus the noise view's weight at selection."""

    noise_view: ViewKind
    outcomes: dict[str, ModeOutcome]
    noise_weights: list[float] = Field(default_factory=list)

    @property
    def blend(self) -> ModeOutcome:
        return self.outcomes[BLEND]

    @property
    def concat(self) -> ModeOutcome:
        return self.outcomes[CONCAT]

    @property
    def best_single_view(self) -> ModeOutcome:
        singles = [o for mode, o in self.outcomes.items() if mode.startswith("single:")]
        return max(singles, key=lambda o: o.mean_test_accuracy)

    @property
    def mean_noise_weight(self) -> float:
        return fmean(self.noise_weights)

    def criteria(self) -> dict[str, bool]:
        blend_accuracy = self.blend.mean_test_accuracy
        return {
            "blend_accuracy": (
                blend_accuracy >= self.concat.mean_test_accuracy
                and blend_accuracy >= self.best_single_view.mean_test_accuracy
            ),
            "noise_weight": self.mean_noise_weight < NOISE_WEIGHT_LIMIT,
            "blend_val_loss": self.blend.mean_val_loss <= self.concat.mean_val_loss,
        }


def run_desk_experiment(
    cfg: DeskExperimentConfig, work_dir: Path | str
) -> DeskExperimentResult:
    """
    Run every mode of ``cfg`` for every seed under ``work_dir``.

    Test accuracy is that of each mode's primary branch on the last fold.
    The result table is also written to ``<work_dir>/desk_result.json``.
    """
    root = Path(work_dir)
    manifest = synth_dataset(cfg.synth_spec(), root / "data")
    n_bands = network_config(cfg.train_config(BLEND, 0), manifest.n_classes, ALL_VIEWS).n_bands
    features = FeatureService(
        ALL_VIEWS, n_bands, root=root / "data", workers=get_settings().extract_workers
    )
    fold = manifest.n_folds

    outcomes = {mode: ModeOutcome(mode=mode) for mode in cfg.modes}
    noise_weights: list[float] = []
    for seed in cfg.seeds:
        partition = split(manifest, fold, SplitSpec.parse(cfg.validation, seed=seed))
        for mode in cfg.modes:
            out = root / f"seed{seed}" / mode.replace(":", "_")
            train_mode = TrainMode.parse(mode)
            (result,) = train(
                partition,
                cfg.train_config(mode, seed),
                train_mode,
                features,
                out,
                manifest.class_names,
                fold,
            )
            report = evaluate_checkpoint(out, partition.test, manifest.n_classes)
            outcomes[mode].test_accuracies.append(report.accuracy(train_mode.primary_branch))
            outcomes[mode].val_losses.append(result.best_val_loss)
            if mode == BLEND:
                noise_weights.append(result.ensemble_weights.weights[cfg.noise_view.value])
            logger.info(
                "seed=%d mode=%s test_acc=%.4f val_loss=%.4f",
                seed,
                mode,
                outcomes[mode].test_accuracies[-1],
                result.best_val_loss,
            )

    experiment = DeskExperimentResult(
        noise_view=cfg.noise_view, outcomes=outcomes, noise_weights=noise_weights
    )
    (root / RESULT_NAME).write_text(experiment.model_dump_json(indent=2), encoding="utf-8")
    logger.info("Wrote %s", root / RESULT_NAME)
    return experiment
