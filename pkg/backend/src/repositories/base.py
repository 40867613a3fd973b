"""
Abstract base repository for CSV-backed tables.

Subclasses convert between domain objects and row documents; the base class
owns file access, header handling and logging.
"""

from __future__ import annotations

import csv
import logging
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, TypeVar

from pydantic import BaseModel, ValidationError

from exceptions import RepositoryError

if TYPE_CHECKING:
    from collections.abc import Iterable
    from pathlib import Path

logger = logging.getLogger(__name__)

T = TypeVar("T", bound=BaseModel)


class BaseRepository[T: BaseModel](ABC):
    """
    Rows of one CSV file.

    Lines starting with ``#`` are directives and are skipped by the reader.
    """

    def __init__(self, path: Path, table_name: str) -> None:
        self._path = path
        self._table_name = table_name

    @property
    def path(self) -> Path:
        return self._path

    @abstractmethod
    def _to_document(self, entity: T) -> dict[str, str]:
        """Convert a domain object to a row of cells."""
        ...

    @abstractmethod
    def _from_document(self, doc: dict[str, str]) -> T:
        """Convert a row of cells to a domain object."""
        ...

    def _fieldnames(self, entities: list[T]) -> list[str]:
        return list(self._to_document(entities[0])) if entities else []

    def write_all(self, entities: Iterable[T], directives: Iterable[str] = ()) -> int:
        """Replace the file with ``entities``; returns the row count."""
        rows = list(entities)
        self._path.parent.mkdir(parents=True, exist_ok=True)
        with self._path.open("w", newline="", encoding="utf-8") as handle:
            for directive in directives:
                handle.write(f"# {directive}\n")
            writer = csv.DictWriter(handle, fieldnames=self._fieldnames(rows), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(self._to_document(row))
        logger.debug("Wrote %d rows to %s (%s)", len(rows), self._path, self._table_name)
        return len(rows)

    def append(self, entity: T) -> None:
        """Append one row, writing the header first if the file is new."""
        document = self._to_document(entity)
        is_new = not self._path.exists() or self._path.stat().st_size == 0
        self._path.parent.mkdir(parents=True, exist_ok=True)
        with self._path.open("a", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(document), lineterminator="\n")
            if is_new:
                writer.writeheader()
            writer.writerow(document)

    def read_documents(self) -> tuple[list[str], list[dict[str, str]], list[str]]:
        """Header, raw rows and directives of the file."""
        if not self._path.is_file():
            raise RepositoryError(self._path, f"{self._table_name} file not found")
        with self._path.open(newline="", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
        directives = [line[1:].strip() for line in lines if line.startswith("#")]
        content = [line for line in lines if line.strip() and not line.startswith("#")]
        if not content:
            raise RepositoryError(self._path, f"{self._table_name} file is empty")
        reader = csv.DictReader(content)
        rows = list(reader)
        return list(reader.fieldnames or []), rows, directives

    def read_all(self) -> list[T]:
        """
        Read and validate every row.

        Raises:
            RepositoryError: If the file is missing, empty, or a row is invalid.
        """
        _, rows, _ = self.read_documents()
        entities: list[T] = []
        for line_no, row in enumerate(rows, start=2):
            try:
                entities.append(self._from_document(row))
            except (ValidationError, ValueError, KeyError) as e:
                raise RepositoryError(self._path, f"row {line_no}: {e}") from e
        logger.debug("Read %d rows from %s", len(entities), self._path)
        return entities

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._path})"
