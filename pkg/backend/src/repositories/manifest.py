"""
Dataset manifest repository.

A manifest is a CSV with columns ``path,label,fold,source`` and an optional
``class_name`` column. A leading ``# folds=N`` directive declares the fold
count; without it the highest fold present is used. Relative audio paths are
resolved against the manifest's directory.
"""

from __future__ import annotations

import logging
from pathlib import Path

from pydantic import ValidationError

from exceptions import ManifestError, RepositoryError
from models.dataset import Manifest, ManifestRecord
from repositories.base import BaseRepository
from schemas.manifest import MANIFEST_COLUMNS, ManifestRow

logger = logging.getLogger(__name__)

FOLDS_DIRECTIVE = "folds="


class ManifestRepository(BaseRepository[ManifestRecord]):
    """Reads and writes manifest CSV files."""

    TABLE_NAME = "manifest"

    def __init__(self, path: Path | str) -> None:
        super().__init__(Path(path), self.TABLE_NAME)
        self._class_names: tuple[str, ...] = ()

    @property
    def root(self) -> Path:
        return self.path.parent

    def _to_document(self, entity: ManifestRecord) -> dict[str, str]:
        try:
            rel = entity.path.relative_to(self.root)
        except ValueError:
            rel = entity.path
        class_name = (
            self._class_names[entity.label] if entity.label < len(self._class_names) else None
        )
        row = ManifestRow(
            path=rel.as_posix(),
            label=entity.label,
            fold=entity.fold,
            source=entity.source_id,
            class_name=class_name,
        )
        return row.to_cells()

    def _from_document(self, doc: dict[str, str]) -> ManifestRecord:
        row = ManifestRow.model_validate({k: v for k, v in doc.items() if v not in (None, "")})
        path = Path(row.path)
        return ManifestRecord(
            path=path if path.is_absolute() else self.root / path,
            label=row.label,
            fold=row.fold,
            source_id=row.source_id,
        )

    def load(self, n_folds: int | None = None) -> Manifest:
        """
        Load and validate the manifest.

        Raises:
            ManifestError: On missing columns, unknown folds, duplicate paths,
                sparse class ids or an empty file.
        """
        try:
            header, rows, directives = self.read_documents()
        except RepositoryError as e:
            raise ManifestError(e.message) from e
        missing = [c for c in MANIFEST_COLUMNS if c not in header]
        if missing:
            msg = f"{self.path}: missing columns {', '.join(missing)}"
            raise ManifestError(msg)
        if not rows:
            msg = f"{self.path}: manifest has no records"
            raise ManifestError(msg)

        try:
            records = self.read_all()
        except RepositoryError as e:
            raise ManifestError(e.message) from e

        declared = n_folds or _declared_folds(directives)
        folds = declared or max(r.fold for r in records)
        class_names = _class_names(rows, records)
        try:
            manifest = Manifest(records=tuple(records), class_names=class_names, n_folds=folds)
        except ValidationError as e:
            msg = f"{self.path}: {e.errors(include_url=False)[0]['msg']}"
            raise ManifestError(msg) from e
        logger.info(
            "Loaded manifest %s: %d records, %d classes, %d folds",
            self.path,
            len(manifest),
            manifest.n_classes,
            manifest.n_folds,
        )
        return manifest

    def save(self, manifest: Manifest) -> int:
        self._class_names = manifest.class_names
        return self.write_all(manifest.records, directives=[f"{FOLDS_DIRECTIVE}{manifest.n_folds}"])


def _declared_folds(directives: list[str]) -> int | None:
    for directive in directives:
        if directive.replace(" ", "").startswith(FOLDS_DIRECTIVE):
            value = directive.replace(" ", "").removeprefix(FOLDS_DIRECTIVE)
            if not value.isdigit():
                msg = f"invalid folds directive {directive!r}"
                raise ManifestError(msg)
            return int(value)
    return None


def _class_names(rows: list[dict[str, str]], records: list[ManifestRecord]) -> tuple[str, ...]:
    n_classes = max(r.label for r in records) + 1
    names: dict[int, str] = {}
    for row, record in zip(rows, records, strict=True):
        name = (row.get("class_name") or "").strip()
        if not name:
            continue
        if names.setdefault(record.label, name) != name:
            msg = f"class {record.label} has two names: {names[record.label]!r} and {name!r}"
            raise ManifestError(msg)
    return tuple(names.get(i, f"class_{i}") for i in range(n_classes))


def load_manifest(path: Path | str, n_folds: int | None = None) -> Manifest:
    return ManifestRepository(path).load(n_folds)


def save_manifest(path: Path | str, manifest: Manifest) -> Path:
    repo = ManifestRepository(path)
    repo.save(manifest)
    return repo.path
