"""Pydantic domain models for multiview-blend."""

from models.blending import AdaptiveWeight, BlendWeights, BranchLedger, GOMeasures
from models.dataset import (
    Manifest,
    ManifestRecord,
    Split,
    SplitRule,
    SplitSpec,
    SynthSpec,
)
from models.features import (
    ALL_VIEWS,
    FilterBank,
    SegmentSpec,
    Spectrogram,
    SpectrogramConfig,
    ViewKind,
    Waveform,
)
from models.network import JOINT_BRANCH, ConvBlockSpec, NetworkConfig, RawFrontSpec, Scale
from models.training import (
    CrossValReport,
    EnsembleWeights,
    EvalReport,
    TrainMode,
    TrainModeKind,
    TrainResult,
)

__all__ = [
    # Features
    "ALL_VIEWS",
    # Network
    "JOINT_BRANCH",
    # Blending
    "AdaptiveWeight",
    "BlendWeights",
    "BranchLedger",
    "ConvBlockSpec",
    # Training
    "CrossValReport",
    "EnsembleWeights",
    "EvalReport",
    "FilterBank",
    "GOMeasures",
    # Dataset
    "Manifest",
    "ManifestRecord",
    "NetworkConfig",
    "RawFrontSpec",
    "Scale",
    "SegmentSpec",
    "Spectrogram",
    "SpectrogramConfig",
    "Split",
    "SplitRule",
    "SplitSpec",
    "SynthSpec",
    "TrainMode",
    "TrainModeKind",
    "TrainResult",
    "ViewKind",
    "Waveform",
]
