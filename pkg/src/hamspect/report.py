"""Deterministic table output.

Tables are written either as comma-separated text with ``#``-prefixed
metadata lines (the default) or as JSON lines with a leading metadata
object.  Floats are rendered with ``repr`` so a rerun with the same config
and seed produces byte-identical files and values round-trip exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

__all__ = ["format_cell", "render_table", "write_table", "table_filename"]


def format_cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # plain float repr also for numpy scalars
    if isinstance(value, int):
        return str(int(value))
    return str(value)


def _json_safe(value: object) -> object:
    if isinstance(value, float):
        return float(value) if math.isfinite(value) else repr(float(value))
    if isinstance(value, int) and not isinstance(value, bool):
        return int(value)
    return value


def render_table(
    columns: Sequence[str],
    rows: Sequence[dict],
    meta: Sequence[tuple[str, object]] = (),
    fmt: str = "table",
) -> str:
    if fmt == "table":
        lines = [f"# {key} = {format_cell(val)}" for key, val in meta]
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(format_cell(row.get(c)) for c in columns))
        return "\n".join(lines) + "\n"
    if fmt == "json-lines":
        lines = [json.dumps({"meta": {k: _json_safe(v) for k, v in meta}})]
        for row in rows:
            lines.append(
                json.dumps({c: _json_safe(row.get(c)) for c in columns})
            )
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown table format {fmt!r}")


def table_filename(stem: str, fmt: str) -> str:
    return f"{stem}.jsonl" if fmt == "json-lines" else f"{stem}.csv"


def write_table(
    directory: str | Path,
    stem: str,
    columns: Sequence[str],
    rows: Sequence[dict],
    meta: Sequence[tuple[str, object]] = (),
    fmt: str = "table",
) -> Path:
    path = Path(directory) / table_filename(stem, fmt)
    path.write_text(render_table(columns, rows, meta, fmt), encoding="utf-8")
    return path
