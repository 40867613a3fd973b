"""
Feature extraction for manifest records.

Each record's views are extracted from its companion audio (or the clip
itself), stored as float32 so cached and in-memory features are identical,
and optionally written to or read from a feature cache. Batches of records
are extracted concurrently with ``asyncio.to_thread`` under a semaphore and
gathered in input order.
"""

from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from config import get_settings
from dsp import extract_view, load_audio, view_audio_path
from exceptions import ConfigurationError, RepositoryError
from models.features import SpectrogramConfig, ViewKind

if TYPE_CHECKING:
    from collections.abc import Sequence

    from models.dataset import ManifestRecord
    from repositories.feature_cache import FeatureCacheRepository

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClipFeatures:
    """All requested views of one clip."""

    path: Path
    views: dict[ViewKind, np.ndarray]
    sample_rate: int
    duration: float


def spectrogram_config(view: ViewKind, n_bands: int) -> SpectrogramConfig:
    return SpectrogramConfig(view_kind=view, n_bands=n_bands)


def extract_clip(path: Path | str, views: Sequence[ViewKind], n_bands: int = 64) -> ClipFeatures:
    """
    Extract every view of one clip as float32 matrices.

    Raises:
        AudioFormatError: If an audio file cannot be read.
        SignalTooShortError: If the clip is shorter than an analysis window.
    """
    clip = Path(path)
    matrices: dict[ViewKind, np.ndarray] = {}
    rate = 0
    duration = 0.0
    for view in views:
        waveform = load_audio(view_audio_path(clip, view))
        cfg = spectrogram_config(view, n_bands) if view.is_spectral else None
        matrices[view] = extract_view(waveform, view, cfg).astype(np.float32)
        rate = waveform.sample_rate
        duration = max(duration, waveform.duration)
    return ClipFeatures(path=clip, views=matrices, sample_rate=rate, duration=duration)


class FeatureService:
    """
    Extracts and memoizes record features.

    With a cache repository, records found in the cache are loaded from it
    and the rest are extracted from audio.
    """

    def __init__(
        self,
        views: Sequence[ViewKind],
        n_bands: int = 64,
        cache: FeatureCacheRepository | None = None,
        root: Path | None = None,
        workers: int | None = None,
    ) -> None:
        if not views:
            msg = "feature extraction needs at least one view"
            raise ConfigurationError(msg)
        self.views = tuple(views)
        self.n_bands = n_bands
        self.cache = cache
        self.root = root
        self.workers = workers or get_settings().extract_workers
        self._memo: dict[Path, ClipFeatures] = {}

    def _relative(self, path: Path) -> Path:
        """Cache key: root-relative when possible, the resolved path otherwise."""
        if self.root is not None:
            try:
                return path.relative_to(self.root)
            except ValueError:
                pass
        return path.resolve()

    def _check_bands(self, path: Path, view: ViewKind, matrix: np.ndarray) -> None:
        if view.is_spectral and matrix.shape[1] != self.n_bands:
            msg = (
                f"cached {view.value} features for {path} have {matrix.shape[1]} bands, "
                f"expected {self.n_bands}; re-run extract with --n-bands {self.n_bands}"
            )
            raise ConfigurationError(msg)

    def _from_cache(self, path: Path) -> ClipFeatures | None:
        if self.cache is None:
            return None
        rel = self._relative(path)
        if not all(self.cache.exists(rel, v) for v in self.views):
            return None
        matrices: dict[ViewKind, np.ndarray] = {}
        rate = 0
        try:
            for view in self.views:
                matrices[view], rate = self.cache.load(rel, view)
        except RepositoryError as e:
            logger.warning("Ignoring unreadable cache entry for %s: %s", path, e.message)
            return None
        for view, matrix in matrices.items():
            self._check_bands(path, view, matrix)
        duration = max(
            (m.shape[0] / rate if v is ViewKind.RAW else 0.0) for v, m in matrices.items()
        )
        if duration == 0.0:
            duration = load_audio(path).duration
        return ClipFeatures(path=path, views=matrices, sample_rate=rate, duration=duration)

    def features_for(self, record: ManifestRecord) -> ClipFeatures:
        cached = self._memo.get(record.path)
        if cached is not None:
            return cached
        features = self._from_cache(record.path) or extract_clip(
            record.path, self.views, self.n_bands
        )
        self._memo[record.path] = features
        return features

    def extract_all(self, records: Sequence[ManifestRecord]) -> list[ClipFeatures]:
        """Features of ``records`` in input order, extracted concurrently."""
        return asyncio.run(self._extract_all(records))

    async def _extract_all(self, records: Sequence[ManifestRecord]) -> list[ClipFeatures]:
        semaphore = asyncio.Semaphore(self.workers)

        async def one(record: ManifestRecord) -> ClipFeatures:
            async with semaphore:
                return await asyncio.to_thread(self.features_for, record)

        results = await asyncio.gather(*(one(r) for r in records))
        logger.info("Extracted features for %d records (%d workers)", len(results), self.workers)
        return list(results)

    def write_cache(self, records: Sequence[ManifestRecord]) -> list[Path]:
        """
        Extract ``records`` and store every view in the cache.

        Raises:
            ConfigurationError: If the service has no cache repository.
        """
        if self.cache is None:
            msg = "no feature cache directory configured"
            raise ConfigurationError(msg)
        written: list[Path] = []
        for features in self.extract_all(records):
            rel = self._relative(features.path)
            for view, matrix in features.views.items():
                written.append(self.cache.save(rel, view, matrix, features.sample_rate))
        logger.info("Cached %d feature records under %s", len(written), self.cache.root)
        return written
