"""
Binary feature cache.

One record per clip per view: a little-endian header
``magic "BCFV" | version u32 | view u8 | T u32 | F u32 | sample_rate u32``
followed by T*F float32 values in row-major order. Record paths mirror the
manifest-relative audio path: ``<root>/<dir>/<stem>.<view>.bcfv``.
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path

import numpy as np

from exceptions import RepositoryError
from models.features import ViewKind

logger = logging.getLogger(__name__)

CACHE_MAGIC = b"BCFV"
CACHE_VERSION = 1
CACHE_SUFFIX = ".bcfv"
_HEADER = struct.Struct("<4sIBIII")


class FeatureCacheRepository:
    """Feature matrices stored under one cache directory."""

    def __init__(self, root: Path | str) -> None:
        self._root = Path(root)

    @property
    def root(self) -> Path:
        return self._root

    def path_for(self, relative_audio: Path | str, view: ViewKind) -> Path:
        rel = Path(relative_audio)
        if rel.is_absolute():
            rel = Path(*rel.parts[1:])
        return self._root / rel.parent / f"{rel.stem}.{view.value}{CACHE_SUFFIX}"

    def exists(self, relative_audio: Path | str, view: ViewKind) -> bool:
        return self.path_for(relative_audio, view).is_file()

    def save(
        self,
        relative_audio: Path | str,
        view: ViewKind,
        features: np.ndarray,
        sample_rate: int,
    ) -> Path:
        """Write one (T, F) matrix; values are stored as float32."""
        matrix = np.asarray(features)
        if matrix.ndim != 2:
            msg = f"feature matrix must be 2-D, got shape {matrix.shape}"
            raise RepositoryError(self.path_for(relative_audio, view), msg)
        frames, bands = matrix.shape
        path = self.path_for(relative_audio, view)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = _HEADER.pack(
            CACHE_MAGIC, CACHE_VERSION, view.cache_code, frames, bands, sample_rate
        )
        payload = np.ascontiguousarray(matrix, dtype="<f4").tobytes()
        path.write_bytes(header + payload)
        logger.debug("Cached %s view %s -> %s", view.value, matrix.shape, path)
        return path

    def load(self, relative_audio: Path | str, view: ViewKind) -> tuple[np.ndarray, int]:
        """
        Read one record; returns the float32 matrix and its sample rate.

        Raises:
            RepositoryError: If the record is missing, truncated, of another
                version or holds a different view.
        """
        path = self.path_for(relative_audio, view)
        matrix, stored_view, rate = read_record(path)
        if stored_view is not view:
            raise RepositoryError(path, f"holds view {stored_view.value}, not {view.value}")
        return matrix, rate


def read_record(path: Path) -> tuple[np.ndarray, ViewKind, int]:
    """Decode a cache record file."""
    if not path.is_file():
        raise RepositoryError(path, "feature record not found")
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise RepositoryError(path, "truncated header")
    magic, version, code, frames, bands, rate = _HEADER.unpack_from(blob)
    if magic != CACHE_MAGIC:
        raise RepositoryError(path, f"bad magic {magic!r}")
    if version != CACHE_VERSION:
        raise RepositoryError(path, f"unsupported cache version {version}")
    try:
        view = ViewKind.from_cache_code(code)
    except ValueError as e:
        raise RepositoryError(path, str(e)) from e
    expected = _HEADER.size + 4 * frames * bands
    if len(blob) != expected:
        raise RepositoryError(path, f"size {len(blob)} != expected {expected}")
    matrix = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(frames, bands)
    return matrix.astype(np.float32), view, rate
