"""Tabular reports serialised as aligned text, CSV or JSON.

Text output rounds to display precision (indices 4 decimals, percents 2,
coefficients 6); CSV and JSON carry full ``repr`` precision. Cells whose
value is ``None`` are undefined quantities and print as ``undefined`` in
text and ``null`` in JSON; keys absent from a row print blank.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

FORMATS = ("text", "csv", "json")

_DECIMALS = {
    "index": 4,
    "pct": 2,
    "coef": 6,
    "t": 2,
    "p": 3,
    "money": 2,
    "num": 6,
    "int": 0,
}


@dataclass(frozen=True)
class Column:
    key: str
    header: str
    kind: str = "num"
    # Further keys to try when a row lacks ``key`` (text rendering only).
    fallback: tuple[str, ...] = ()


@dataclass
class Table:
    title: str
    columns: list[Column]
    rows: list[dict]
    notes: list[str] = field(default_factory=list)


@dataclass
class Report:
    title: str
    tables: list[Table]
    meta: dict = field(default_factory=dict)


def _plain(v):
    """JSON-safe plain Python value."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def _fmt_text(v, kind: str) -> str:
    if v is None:
        return "undefined"
    if isinstance(v, str):
        return v
    if kind == "int" or isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return f"{int(v):,}"
    v = float(v)
    if math.isnan(v):
        return "undefined"
    s = f"{v:.{_DECIMALS.get(kind, 6)}f}"
    # Avoid printing "-0.0000".
    if s.startswith("-") and float(s) == 0:
        s = s[1:]
    return s


def _cell(row: dict, col: Column):
    for key in (col.key, *col.fallback):
        if key in row:
            return True, row[key]
    return False, None


def render_text(report: Report) -> str:
    out = [report.title, "=" * len(report.title), ""]
    for table in report.tables:
        out.append(table.title)
        grid = [[c.header for c in table.columns]]
        for row in table.rows:
            line = []
            for c in table.columns:
                present, v = _cell(row, c)
                line.append(_fmt_text(v, c.kind) if present else "")
            grid.append(line)
        widths = [max(len(r[j]) for r in grid) for j in range(len(table.columns))]
        for i, r in enumerate(grid):
            cells = [r[0].ljust(widths[0])] + [r[j].rjust(widths[j]) for j in range(1, len(r))]
            out.append("  ".join(cells).rstrip())
            if i == 0:
                out.append("  ".join("-" * w for w in widths))
        for note in table.notes:
            out.append(f"Note: {note}")
        out.append("")
    for key, value in report.meta.items():
        out.append(f"{key}: {_meta_text(value)}")
    return "\n".join(out).rstrip() + "\n"


def _meta_text(value) -> str:
    if isinstance(value, dict):
        return ", ".join(f"{k}={_meta_text(v)}" for k, v in value.items()) or "none"
    if isinstance(value, (list, tuple)):
        return ", ".join(_meta_text(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_value(v):
    if v is None:
        return "undefined"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for i, table in enumerate(report.tables):
        if i:
            buf.write("\n")
        buf.write(f"# {table.title}\n")
        keys = _keys(table)
        writer.writerow(keys)
        for row in table.rows:
            writer.writerow(["" if k not in row else _csv_value(row[k]) for k in keys])
    return buf.getvalue()


def _keys(table: Table) -> list[str]:
    keys = []
    for c in table.columns:
        keys.append(c.key)
        keys.extend(c.fallback)
    for row in table.rows:
        keys.extend(row.keys())
    return list(dict.fromkeys(keys))


def render_json(report: Report) -> str:
    doc = {
        "title": report.title,
        "meta": _plain(report.meta),
        "tables": [
            {"title": t.title, "columns": _keys(t), "rows": [_plain(r) for r in t.rows], "notes": list(t.notes)}
            for t in report.tables
        ],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def render(report: Report, fmt: str = "text") -> str:
    if fmt == "text":
        return render_text(report)
    if fmt == "csv":
        return render_csv(report)
    if fmt == "json":
        return render_json(report)
    raise ValidationError(f"unknown format {fmt!r}; expected one of {FORMATS}")
