"""Byte-stable CSV and JSON output.

Floats are written with 12 significant digits, JSON keys are sorted, and
files are replaced atomically so a failed write never leaves a partial
report behind.
"""

import dataclasses
import io
import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.12g"


def _plain(value):
    """Convert to JSON-friendly python values with rounded floats."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        if hasattr(value, "to_json"):
            return _plain(value.to_json())
        return _plain({f.name: getattr(value, f.name) for f in dataclasses.fields(value)})
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating, Fraction)):
        x = float(value)
        if not math.isfinite(x):
            return str(x)
        return float(FLOAT_FMT % x)
    if isinstance(value, complex):
        return {"re": _plain(value.real), "im": _plain(value.imag)}
    return value


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating, Fraction)):
        return FLOAT_FMT % float(value)
    return str(value)


def _flatten(row):
    """One CSV record; sequences become ``name_0, name_1, ...`` columns."""
    row = _plain(row)
    out = {}
    for key, val in row.items():
        if isinstance(val, list):
            for i, v in enumerate(val):
                out[f"{key}_{i}"] = v
        else:
            out[key] = val
    return out


def render(rows, fmt="csv"):
    """Report text for ``rows`` (a nonempty list of records, or one mapping for JSON)."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    if rows is None or (isinstance(rows, (list, tuple)) and len(rows) == 0) or (isinstance(rows, dict) and not rows):
        raise ValueError("nothing to write: rows are empty")
    if fmt == "json":
        return json.dumps(_plain(rows), sort_keys=True, indent=2) + "\n"
    if isinstance(rows, dict):
        rows = [rows]
    flat = [_flatten(r) for r in rows]
    header = list(flat[0])
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for rec in flat:
        if list(rec) != header:
            raise ValueError("rows do not share one set of columns")
        buf.write(",".join(_cell(rec[h]) for h in header) + "\n")
    return buf.getvalue()


def write_report(rows, fmt="csv", out=None):
    """Render ``rows`` and write them to ``out`` (returns the text)."""
    text = render(rows, fmt)
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=out.parent, prefix=f".{out.name}.")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, out)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
    return text
