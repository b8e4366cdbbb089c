"""CSV / JSON rendering with fixed 12-significant-digit floats."""

from __future__ import annotations

import io
import json
import math

import numpy as np

CSV_VERSION = "gap-csv v1"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(f"{x:.12g}") if math.isfinite(x) else None
    return obj


def render_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def render_csv(command: str, header, rows, comments=None) -> str:
    """CSV text: a version line, optional ``# key=value`` lines, header, rows."""
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION} {command}\n")
    for key, value in (comments or {}).items():
        buf.write(f"# {key}={fmt(value)}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()
