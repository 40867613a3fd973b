"""Pydantic row schemas for the CSV files multiview-blend reads and writes."""

from schemas.common import CsvRow, format_cell
from schemas.logs import MetricsRow, WeightRow
from schemas.manifest import MANIFEST_COLUMNS, ManifestRow
from schemas.report import ENSEMBLE_BRANCH, BlendReportRow, EvalRow

__all__ = [
    "ENSEMBLE_BRANCH",
    "MANIFEST_COLUMNS",
    "BlendReportRow",
    "CsvRow",
    "EvalRow",
    "ManifestRow",
    "MetricsRow",
    "WeightRow",
    "format_cell",
]
