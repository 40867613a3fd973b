"""
Checkpoint container.

Layout: ``b"BCKP" | version u32 | meta_len u32 | meta JSON | npz archive``.
The JSON echoes the network and training configuration, the blend and
ensemble weights and the selection bookkeeping; the archive holds the named
parameter tensors, batchnorm running statistics and optimizer moments.
"""

from __future__ import annotations

import io
import logging
import struct
import zipfile
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from pydantic import ValidationError

from exceptions import CheckpointError, MissingCheckpointError
from models.training import CheckpointMeta

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping

    from models.features import ViewKind

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"BCKP"
CHECKPOINT_VERSION = 1
CHECKPOINT_NAME = "best.bckp"
_PREFIX = struct.Struct("<4sII")


def save_checkpoint(
    path: Path | str,
    meta: CheckpointMeta,
    arrays: Mapping[str, np.ndarray],
) -> Path:
    """Write a checkpoint atomically (temporary file, then rename)."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    meta_bytes = meta.model_dump_json().encode("utf-8")
    archive = io.BytesIO()
    np.savez(archive, **{k: np.asarray(v) for k, v in sorted(arrays.items())})
    blob = _PREFIX.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(meta_bytes))
    tmp = out.with_name(out.name + ".tmp")
    tmp.write_bytes(blob + meta_bytes + archive.getvalue())
    tmp.replace(out)
    logger.info(
        "Saved checkpoint %s (step=%d, val_acc=%.4f)", out, meta.step, meta.best_val_accuracy
    )
    return out


def load_checkpoint(path: Path | str) -> tuple[CheckpointMeta, dict[str, np.ndarray]]:
    """
    Read a checkpoint.

    Raises:
        MissingCheckpointError: If the file does not exist.
        CheckpointError: On a bad header, an unknown version or corrupt content.
    """
    src = Path(path)
    if not src.is_file():
        raise MissingCheckpointError([str(src)])
    blob = src.read_bytes()
    if len(blob) < _PREFIX.size:
        raise CheckpointError(str(src), "truncated header")
    magic, version, meta_len = _PREFIX.unpack_from(blob)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(str(src), f"bad magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(str(src), f"unsupported version {version}")
    body = blob[_PREFIX.size :]
    if len(body) < meta_len:
        raise CheckpointError(str(src), "truncated metadata")
    try:
        meta = CheckpointMeta.model_validate_json(body[:meta_len])
    except ValidationError as e:
        raise CheckpointError(str(src), f"invalid metadata: {e.error_count()} errors") from e
    try:
        with np.load(io.BytesIO(body[meta_len:]), allow_pickle=False) as archive:
            arrays = {name: archive[name] for name in archive.files}
    except (ValueError, OSError, zipfile.BadZipFile) as e:
        raise CheckpointError(str(src), f"corrupt tensor archive: {e}") from e
    logger.debug("Loaded checkpoint %s: %d arrays", src, len(arrays))
    return meta, arrays


class CheckpointRepository:
    """
    Checkpoints of one training output directory.

    Single-model modes keep ``<root>/best.bckp``; late fusion keeps one
    sub-directory per view.
    """

    def __init__(self, root: Path | str) -> None:
        self._root = Path(root)

    @property
    def root(self) -> Path:
        return self._root

    def path_for(self, view: ViewKind | None = None) -> Path:
        if view is None:
            return self._root / CHECKPOINT_NAME
        return self._root / view.value / CHECKPOINT_NAME

    def save(
        self,
        meta: CheckpointMeta,
        arrays: Mapping[str, np.ndarray],
        view: ViewKind | None = None,
    ) -> Path:
        return save_checkpoint(self.path_for(view), meta, arrays)

    def load(self, view: ViewKind | None = None) -> tuple[CheckpointMeta, dict[str, np.ndarray]]:
        return load_checkpoint(self.path_for(view))

    def load_late(
        self, views: Iterable[ViewKind]
    ) -> dict[ViewKind, tuple[CheckpointMeta, dict[str, np.ndarray]]]:
        """
        Load every per-view checkpoint of a late-fusion run.

        Raises:
            MissingCheckpointError: Listing every view whose checkpoint is absent.
        """
        wanted = list(views)
        missing = [str(self.path_for(v)) for v in wanted if not self.path_for(v).is_file()]
        if missing:
            raise MissingCheckpointError(missing)
        return {v: self.load(v) for v in wanted}


def resolve_checkpoint(path: Path | str) -> Path:
    """Accept either a checkpoint file or a training output directory."""
    candidate = Path(path)
    if candidate.is_dir():
        return candidate / CHECKPOINT_NAME
    return candidate
