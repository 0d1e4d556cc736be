"""CSV ingestion and writing for objects and reports."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .core import ObjectMN, ValidationError

SPACE_NAMES = ("x", "y", "z")
CHANNEL_NAMES = ("r", "g", "b")


def default_header(space_dim: int, channel_dim: int, weights: bool = False) -> list[str]:
    space = list(SPACE_NAMES) if space_dim == 3 else [f"s{i + 1}" for i in range(space_dim)]
    chan = list(CHANNEL_NAMES) if channel_dim == 3 else [f"c{i + 1}" for i in range(channel_dim)]
    return space + chan + (["w"] if weights else [])


def _data_lines(text: str) -> list[tuple[int, str]]:
    return [(i, line) for i, line in enumerate(text.splitlines(), start=1)
            if line.strip() and not line.lstrip().startswith("#")]


def read_object(path: str | Path, space_dim: int = 3, channel_dim: int = 3) -> ObjectMN:
    """Read a CSV with a header row: M spatial columns, N channel columns, optional trailing ``w``."""
    path = Path(path)
    lines = _data_lines(path.read_text())
    if not lines:
        raise ValidationError(f"{path}: no header row")
    header_line, header = lines[0][0], next(csv.reader([lines[0][1]]))
    header = [h.strip() for h in header]
    width = space_dim + channel_dim
    has_w = len(header) == width + 1 and header[-1].lower() == "w"
    if len(header) != width and not has_w:
        raise ValidationError(f"{path}:{header_line}: expected {width} columns "
                              f"(+ optional 'w'), header has {len(header)}")
    rows = []
    for lineno, line in lines[1:]:
        cells = next(csv.reader([line]))
        if len(cells) != len(header):
            raise ValidationError(f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}")
        row = []
        for col, cell in enumerate(cells):
            try:
                v = float(cell)
            except ValueError:
                raise ValidationError(
                    f"{path}:{lineno}: non-numeric value {cell.strip()!r} in column {col + 1} ({header[col]})"
                ) from None
            if not math.isfinite(v):
                raise ValidationError(f"{path}:{lineno}: non-finite value in column {col + 1} ({header[col]})")
            row.append(v)
        rows.append(row)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    arr = np.array(rows)
    weights = arr[:, width] if has_w else None
    return ObjectMN(arr[:, :space_dim], arr[:, space_dim:width], weights)


def provenance(**fields) -> str:
    parts = [f"dami {__version__}"] + [f"{k}={v}" for k, v in fields.items()]
    return "# " + " ".join(parts)


def write_object(path: str | Path, obj: ObjectMN, comment: str | None = None):
    with_w = not np.all(obj.weights == 1.0)
    buf = io.StringIO()
    if comment:
        buf.write(comment.rstrip("\n") + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(default_header(obj.space_dim, obj.channel_dim, with_w))
    data = np.hstack([obj.coords, obj.channels] + ([obj.weights[:, None]] if with_w else []))
    for row in data:
        writer.writerow([repr(float(v)) for v in row])
    Path(path).write_text(buf.getvalue())


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_table(path: str | Path | None, rows: Sequence[Mapping], columns: Iterable[str] | None = None,
                comment: str | None = None) -> str:
    """Write dict rows as CSV (to ``path`` if given) and return the text."""
    columns = list(columns or (rows[0].keys() if rows else []))
    buf = io.StringIO()
    if comment:
        buf.write(comment.rstrip("\n") + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c, "")) for c in columns])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_table(path: str | Path) -> list[dict[str, str]]:
    lines = [line for _, line in _data_lines(Path(path).read_text())]
    return list(csv.DictReader(lines))


def label_from_filename(path: str | Path) -> str:
    """Class label is the file stem up to the first underscore."""
    return Path(path).stem.split("_", 1)[0]
