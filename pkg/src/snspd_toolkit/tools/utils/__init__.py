"""Utilities for the toolkit's tool packages.

Exposes the response builder shared by every ``handle_*`` function and the
writers for plot-ready tables. Everything here is protocol-agnostic: the CLI
decides where the response and its tables end up.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import json
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

logger = logging.getLogger("snspd_toolkit")


def _make_serialisable(obj: Any) -> Any:
    """JSON-native copy of a result tree.

    Complex values become ``{"re", "im"}`` pairs; numpy values, enums,
    dataclasses, pydantic models and paths map to their plain equivalents.
    """
    if obj is None:
        return None
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, str | bool | int | float):
        return obj
    if isinstance(obj, np.generic):
        return _make_serialisable(obj.item())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return [_make_serialisable(item) for item in obj.tolist()]
    if isinstance(obj, BaseModel):
        return _make_serialisable(obj.model_dump(mode="json"))
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _make_serialisable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _make_serialisable(v) for k, v in obj.items()}
    if isinstance(obj, list | tuple | set | frozenset):
        return [_make_serialisable(item) for item in obj]
    return str(obj)


def create_response(
    data: Any,
    metadata: dict[str, Any] | None = None,
    error: dict[str, Any] | None = None,
    tables: Sequence[Table] | None = None,
) -> dict:
    """Handler return value: ``status`` plus ``results`` or ``message``.

    ``tables`` stay as :class:`Table` objects; the CLI decides whether they
    become CSV files or embedded records.
    """
    response: dict[str, Any]
    if error:
        response = {"status": "error", "message": error}
    else:
        response = {"status": "success", "results": _make_serialisable(data)}
    if metadata:
        response["metadata"] = _make_serialisable(metadata)
    if tables and not error:
        response["tables"] = list(tables)
    return response


@dataclasses.dataclass(frozen=True)
class Table:
    """A named, column-labelled table destined for a CSV file.

    Column names carry their unit suffix (``wavelength_nm``, ``delay_ns``).
    """

    name: str
    columns: tuple[str, ...]
    rows: Any  # 2-D array-like, one row per record

    def records(self) -> list[dict[str, Any]]:
        return [dict(zip(self.columns, _make_serialisable(list(row)))) for row in self.rows]


def config_comment_lines(config: dict[str, Any]) -> list[str]:
    """Render a resolved config as ``# config: {...}`` comment lines."""
    text = json.dumps(_make_serialisable(config), sort_keys=True, ensure_ascii=False)
    return [f"# config: {text}"]


def _format_cell(value: Any) -> str:
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(_make_serialisable(value))


def write_csv_table(path: Path, table: Table, config: dict[str, Any] | None = None) -> Path:
    """Write a table as CSV: provenance comment lines, header row, data rows."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        if config is not None:
            for line in config_comment_lines(config):
                f.write(line + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_format_cell(v) for v in row])
    logger.debug(f"Wrote {path}", extra={"table": table.name, "rows": len(table.rows)})
    return path


def read_csv_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    """Read a CSV written by :func:`write_csv_table` (or by hand), skipping ``#`` lines."""
    with open(path, encoding="utf-8", newline="") as f:
        lines: Iterable[str] = (line for line in f if line.strip() and not line.lstrip().startswith("#"))
        reader = csv.reader(lines)
        rows = [row for row in reader if row]
    if not rows:
        return [], []
    return [c.strip() for c in rows[0]], rows[1:]


def write_json_report(path: Path, payload: dict[str, Any]) -> Path:
    """Write a structured-text (JSON) report with stable key order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_make_serialisable(payload), f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return path


def uniform_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive uniform grid; ends at ``stop`` when the step divides the span."""
    from snspd_toolkit.errors import ValidationError

    if step <= 0 or stop < start:
        raise ValidationError(f"Invalid grid [{start}, {stop}] with step {step}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)
