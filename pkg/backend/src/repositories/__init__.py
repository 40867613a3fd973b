"""
File-backed persistence: manifests, the feature cache, checkpoints and CSV logs.
"""

from repositories.base import BaseRepository
from repositories.checkpoint import (
    CHECKPOINT_NAME,
    CheckpointRepository,
    load_checkpoint,
    resolve_checkpoint,
    save_checkpoint,
)
from repositories.feature_cache import FeatureCacheRepository, read_record
from repositories.logs import (
    METRICS_FILE,
    WEIGHTS_FILE,
    BlendReportRepository,
    EvalReportRepository,
    MetricsRepository,
    WeightLogRepository,
    pivot_weights,
    write_blend_report,
)
from repositories.manifest import ManifestRepository, load_manifest, save_manifest

__all__ = [
    "CHECKPOINT_NAME",
    "METRICS_FILE",
    "WEIGHTS_FILE",
    "BaseRepository",
    "BlendReportRepository",
    "CheckpointRepository",
    "EvalReportRepository",
    "FeatureCacheRepository",
    "ManifestRepository",
    "MetricsRepository",
    "WeightLogRepository",
    "load_checkpoint",
    "load_manifest",
    "pivot_weights",
    "read_record",
    "resolve_checkpoint",
    "save_checkpoint",
    "save_manifest",
    "write_blend_report",
]
