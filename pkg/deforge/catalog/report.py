"""
Machine-Readable Reports.

Every CLI run produces one JSON document validated by ``ReportModel``.
Exact scalars are written as "a/b+c/d*i" strings, forms in the
structure-constant syntax, so reports diff cleanly and parse back exactly.
Keys are sorted and the indentation is fixed, which makes the bytes a
function of the results alone.
"""

import dataclasses
import json
import logging
from enum import Enum
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from deforge import __version__
from deforge.constants import DEFAULT_REPORT_INDENT, REPORT_SCHEMA
from deforge.deformation.series import BiSeries
from deforge.exterior import Form, FrameEndomorphism, VectorForm
from deforge.linalg import Matrix
from deforge.scalars import FloatField, GaussianRational, format_exact

logger = logging.getLogger(__name__)


class FactModel(BaseModel):
    """A catalog fact as it appears in a report."""

    name: str
    expected: Any = None
    actual: Any = None
    provenance: str
    matches: bool
    note: str = ""


class ReportModel(BaseModel):
    """Versioned report document."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_id: str = Field(default=REPORT_SCHEMA, alias="schema")
    version: str = __version__
    command: str = Field(..., min_length=1)
    algebra: str | None = None
    backend: str = "exact"
    seed: int = 0
    passed: bool = True
    results: dict[str, Any] = Field(default_factory=dict)
    facts: list[FactModel] = Field(default_factory=list)


def _index_key(index: tuple) -> str:
    i, j = index
    return ".".join(map(str, i)) + "|" + ".".join(map(str, j))


def to_jsonable(value: Any) -> Any:
    """Convert engine values to JSON-compatible data with exact text for scalars."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, GaussianRational):
        return format_exact(value)
    if isinstance(value, complex):
        return FloatField().format(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Form):
        return value.format()
    if isinstance(value, VectorForm):
        return {str(slot): form.format() for slot, form in value.items()}
    if isinstance(value, FrameEndomorphism):
        return to_jsonable(value.matrix)
    if isinstance(value, Matrix):
        return [[to_jsonable(value.field.coerce(x)) for x in row] for row in value.rows]
    if isinstance(value, BiSeries):
        return {_index_key(index): to_jsonable(term) for index, term in value.items()}
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_jsonable({f.name: getattr(value, f.name) for f in dataclasses.fields(value)})
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = [to_jsonable(v) for v in value]
        return sorted(items, key=repr) if isinstance(value, (set, frozenset)) else items
    if hasattr(value, "item"):
        return to_jsonable(value.item())
    raise TypeError(f"cannot serialize {type(value).__name__}")


def emit_report(report: ReportModel, indent: int = DEFAULT_REPORT_INDENT) -> str:
    """Serialize a report deterministically."""
    data = report.model_dump(by_alias=True, mode="json", exclude={"results"})
    data["results"] = to_jsonable(report.results)
    return json.dumps(data, sort_keys=True, indent=indent, ensure_ascii=False) + "\n"


def parse_report(text: str) -> ReportModel:
    """Parse a serialized report.

    Raises:
        pydantic.ValidationError: If the document does not match the schema.
    """
    report = ReportModel.model_validate_json(text)
    if report.schema_id != REPORT_SCHEMA:
        logger.warning(f"Report schema {report.schema_id!r} differs from {REPORT_SCHEMA!r}")
    return report
