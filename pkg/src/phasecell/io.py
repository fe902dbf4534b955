"""Deterministic JSON/CSV writers (17 significant digits, '.' decimals)."""

from __future__ import annotations

import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np


def _num(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if all(c in "-0123456789" for c in text):
        text += ".0"
    return text


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    close = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + close + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def csv_text(header, columns) -> str:
    """CSV with a header row; integer columns stay integers, floats use %.17g."""
    cols = [np.asarray(c) for c in columns]
    fmt = ["%d" if np.issubdtype(c.dtype, np.integer) else "%.17g" for c in cols]
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    if cols and cols[0].size:
        table = np.empty((cols[0].size, len(cols)), dtype=object)
        for j, c in enumerate(cols):
            table[:, j] = c
        np.savetxt(buf, table, fmt=fmt, delimiter=",")
    return buf.getvalue()


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
