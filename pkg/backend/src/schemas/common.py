"""
Shared base for CSV row schemas.

Every log and report file is a CSV whose rows validate against one of these
models. Floats are written with ``repr`` so identical runs produce
byte-identical files.
"""

from __future__ import annotations

from typing import Any, ClassVar

from pydantic import BaseModel, ConfigDict


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class CsvRow(BaseModel):
    """Base schema for one CSV row; ``columns`` fixes the column order."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    columns: ClassVar[tuple[str, ...]] = ()

    def to_cells(self) -> dict[str, str]:
        data = self.model_dump(by_alias=True)
        return {column: format_cell(data[column]) for column in self.columns}

    @classmethod
    def from_cells(cls, cells: dict[str, str]) -> CsvRow:
        return cls.model_validate({k: (v if v != "" else None) for k, v in cells.items()})
