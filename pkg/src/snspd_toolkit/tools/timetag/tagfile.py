"""Time-tag and histogram files.

Tag files are plain text: ``#``-prefixed YAML header lines with the stream
metadata, then one timestamp per line in ns with three decimals.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import yaml

from snspd_toolkit.errors import ValidationError
from snspd_toolkit.tools.timetag.timetag_types import Histogram, TimeTagStream
from snspd_toolkit.tools.utils import _make_serialisable, read_csv_rows

logger = logging.getLogger("snspd_toolkit")

HISTOGRAM_COLUMNS = ("bin_lo", "bin_hi", "count")


def write_tag_file(path: Path, stream: TimeTagStream) -> Path:
    header = {"duration_ns": stream.duration_ns, "units": "ns", **stream.meta}
    text = yaml.safe_dump(_make_serialisable(header), sort_keys=True, default_flow_style=False)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for line in text.splitlines():
            f.write(f"# {line}\n")
        for tag in stream.tags:
            f.write(f"{tag:.3f}\n")
    logger.debug(f"Wrote {len(stream)} time tags to {path}")
    return path


def read_tag_file(path: Path) -> TimeTagStream:
    """Read a tag file; without a ``duration_ns`` header the last tag sets the duration."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Time-tag file not found: {path}")
    header_lines: list[str] = []
    values: list[float] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                header_lines.append(stripped[1:].removeprefix(" "))
                continue
            try:
                values.append(float(stripped))
            except ValueError as e:
                raise ValidationError(f"{path}:{lineno}: not a timestamp: {stripped!r}") from e
    try:
        meta = yaml.safe_load("\n".join(header_lines)) if header_lines else {}
    except yaml.YAMLError as e:
        raise ValidationError(f"{path}: unreadable header: {e}") from e
    if not isinstance(meta, dict):
        meta = {}
    tags = np.array(values, dtype=float)
    duration = float(meta.pop("duration_ns", tags[-1] if tags.size else 0.0))
    meta.pop("units", None)
    return TimeTagStream(tags=tags, duration_ns=duration, meta=meta)


def read_histogram_csv(path: Path, unit: str = "ps") -> Histogram:
    """Histogram from a ``bin_lo,bin_hi,count`` CSV."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Histogram file not found: {path}")
    header, rows = read_csv_rows(path)
    if tuple(header) != HISTOGRAM_COLUMNS:
        raise ValidationError(f"{path}: expected header {','.join(HISTOGRAM_COLUMNS)}, got {','.join(header)}")
    try:
        data = np.array([[float(v) for v in row] for row in rows], dtype=float)
    except ValueError as e:
        raise ValidationError(f"{path}: non-numeric histogram entry: {e}") from e
    if data.shape[0] == 0:
        raise ValidationError(f"{path}: histogram has no bins")
    if np.any(data[1:, 0] != data[:-1, 1]):
        raise ValidationError(f"{path}: histogram bins must be contiguous")
    edges = np.append(data[:, 0], data[-1, 1])
    return Histogram(bin_edges=edges, counts=data[:, 2], unit=unit)
