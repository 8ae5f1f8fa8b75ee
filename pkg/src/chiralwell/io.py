"""Self-describing tables and line-delimited records.

Tables are comma-separated with a ``#``-commented header block holding the
run configuration as JSON. Floats are written with ``repr`` (shortest
round-trip form), so re-reading reproduces the in-memory values exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__

COMMENT = "# "


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    s = str(v.value if hasattr(v, "value") else v)
    if "," in s or "\n" in s:
        raise ValueError(f"table cell may not contain separators: {s!r}")
    return s


def _parse(s: str):
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not JSON serialisable: {o!r}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=_json_default, allow_nan=True)


def write_table(path, columns: dict, meta: dict | None = None):
    path = Path(path)
    names = list(columns)
    cols = [list(columns[k]) for k in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"columns differ in length: {dict(zip(names, map(len, cols)))}")
    lines = [f"{COMMENT}chiralwell {__version__}"]
    if meta:
        for k in sorted(meta):
            lines.append(f"{COMMENT}{k}: {dumps(meta[k])}")
    lines.append(",".join(names))
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_table(path):
    """Return ``(meta, columns)``; numeric cells come back as int/float."""
    meta = {}
    header = None
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith(COMMENT):
            body = line[len(COMMENT):]
            if ": " in body:
                k, v = body.split(": ", 1)
                meta[k] = json.loads(v)
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append([_parse(c) for c in line.split(",")])
    cols = {name: [r[i] for r in rows] for i, name in enumerate(header or [])}
    return meta, cols


def write_records(path, records, meta: dict | None = None):
    """One JSON object per line; the first line carries the metadata."""
    lines = [dumps({"_meta": {"version": __version__, **(meta or {})}})]
    lines += [dumps(r) for r in records]
    Path(path).write_text("\n".join(lines) + "\n")


def read_records(path):
    lines = Path(path).read_text().splitlines()
    first = json.loads(lines[0])
    return first.get("_meta", {}), [json.loads(s) for s in lines[1:]]


def write(path_stem, columns: dict, meta: dict, fmt: str = "table") -> Path:
    """Write ``columns`` as ``<stem>.csv`` (table) or ``<stem>.jsonl`` (records)."""
    stem = Path(path_stem)
    if fmt == "table":
        path = stem.with_suffix(".csv")
        write_table(path, columns, meta)
    elif fmt == "records":
        path = stem.with_suffix(".jsonl")
        names = list(columns)
        recs = [dict(zip(names, (_record_value(v) for v in row))) for row in zip(*columns.values())]
        write_records(path, recs, meta)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def _record_value(v):
    if isinstance(v, (np.floating, float)):
        return float(v) if math.isfinite(v) else repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if hasattr(v, "value"):
        return v.value
    return v
