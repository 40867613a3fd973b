"""Manifest CSV row: ``path,label,fold,source`` plus an optional class name."""

from __future__ import annotations

from typing import ClassVar

from pydantic import Field

from schemas.common import CsvRow

MANIFEST_COLUMNS = ("path", "label", "fold", "source")


class ManifestRow(CsvRow):
    columns: ClassVar[tuple[str, ...]] = (*MANIFEST_COLUMNS, "class_name")

    path: str = Field(min_length=1)
    label: int = Field(ge=0)
    fold: int = Field(ge=1)
    source_id: str = Field(alias="source", min_length=1)
    class_name: str | None = None
