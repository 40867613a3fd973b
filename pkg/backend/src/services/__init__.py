"""
Services for multiview-blend.

Services hold the training, blending, inference and data-preparation logic
and orchestrate the repositories.
"""

from services.blending_service import (
    GradientBlender,
    adaptive_weight,
    blended_loss,
    branch_loss,
    normalize,
    smooth,
)
from services.evaluation_service import crossval_report, evaluate_checkpoint
from services.experiment_service import DeskExperimentConfig, run_desk_experiment
from services.feature_service import ClipFeatures, FeatureService, extract_clip
from services.inference_service import (
    evaluate_predictions,
    infer_file,
    late_fusion,
    predict,
    self_ensemble,
)
from services.optimizer import Adam, AdamState, lr_at
from services.split_service import split, training_subset
from services.synthesis_service import synth_dataset
from services.training_service import Trainer, train

__all__ = [
    "Adam",
    "AdamState",
    "ClipFeatures",
    "DeskExperimentConfig",
    "FeatureService",
    "GradientBlender",
    "Trainer",
    "adaptive_weight",
    "blended_loss",
    "branch_loss",
    "crossval_report",
    "evaluate_checkpoint",
    "evaluate_predictions",
    "extract_clip",
    "infer_file",
    "late_fusion",
    "lr_at",
    "normalize",
    "predict",
    "run_desk_experiment",
    "self_ensemble",
    "smooth",
    "split",
    "synth_dataset",
    "train",
    "training_subset",
]
