"""Byte-stable JSON emission for reports.

Floats are rendered with 17 significant digits (%.17g), which round-trips
every double exactly; dict key order is preserved as constructed, so a
fixed document structure always serializes to identical bytes.
"""

from __future__ import annotations

import json
import math

import numpy as np


def _scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            raise ValueError(f"cannot serialize non-finite float: {v}")
        return format(v, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot serialize value of type {type(value).__name__}")


def dumps(value, indent: int = 0, _level: int = 0) -> str:
    """Serialize dicts, lists and scalars; deterministic for a fixed structure."""
    pad = " " * (indent * (_level + 1)) if indent else ""
    close_pad = " " * (indent * _level) if indent else ""
    sep = ",\n" if indent else ", "
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in value.items()]
        body = sep.join(items)
        return "{\n" + body + "\n" + close_pad + "}" if indent else "{" + body + "}"
    if isinstance(value, (list, tuple)):
        if not len(value):
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in value]
        body = sep.join(items)
        return "[\n" + body + "\n" + close_pad + "]" if indent else "[" + body + "]"
    if isinstance(value, np.ndarray):
        return dumps(value.tolist(), indent, _level)
    return _scalar(value)
