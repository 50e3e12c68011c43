"""Deterministic run records and the append-only ledger.

Records serialize to single-line JSON with floats at 17 significant
digits, so identical runs produce byte-identical lines and every float
round-trips exactly.  Exact rationals are carried as "num/den" strings.
The ledger is one record per line, append-only, at a configurable path.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterator

import numpy as np

VERSION = "0.1.0"


def format_float(x: float) -> str:
    return "%.17g" % x


def _emit(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if isinstance(value, Fraction):
        return json.dumps(f"{value.numerator}/{value.denominator}")
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=True)
    if value is None:
        return "null"
    if isinstance(value, dict):
        parts = (f"{json.dumps(str(k), ensure_ascii=True)}:{_emit(v)}"
                 for k, v in value.items())
        return "{" + ",".join(parts) + "}"
    if isinstance(value, (list, tuple)) or isinstance(value, np.ndarray):
        return "[" + ",".join(_emit(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps_record(record: dict) -> str:
    """One-line JSON with stable field order (insertion order)."""
    return _emit(record)


def loads_record(line: str) -> dict:
    return json.loads(line)


def append_ledger(path: str, record: dict) -> None:
    with open(path, "a", encoding="ascii") as fh:
        fh.write(dumps_record(record) + "\n")


def iter_ledger(path: str) -> Iterator[dict]:
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield loads_record(line)


def _flatten(prefix: str, value, rows: list) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(value, (list, tuple)):
        for idx, v in enumerate(value):
            _flatten(f"{prefix}[{idx}]", v, rows)
    else:
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, (float, np.floating)):
            text = format_float(float(value))
        elif isinstance(value, Fraction):
            text = f"{value.numerator}/{value.denominator}"
        elif value is None:
            text = ""
        else:
            text = str(value)
        rows.append((prefix, text))


def record_to_csv(record: dict) -> str:
    """CSV view of a record.

    Threshold runs flatten their probe curve to one row per m; other
    commands emit two-column key/value rows over the flattened payload.
    """
    results = record.get("results", {})
    curve = results.get("curve") if isinstance(results, dict) else None
    lines = []
    if isinstance(curve, (list, tuple)) and curve and isinstance(curve[0], dict):
        cols = list(curve[0].keys())
        lines.append(",".join(cols))
        for point in curve:
            cells = []
            for c in cols:
                v = point[c]
                cells.append(format_float(float(v))
                             if isinstance(v, (float, np.floating)) else str(v))
            lines.append(",".join(cells))
    else:
        rows: list = []
        _flatten("", record, rows)
        lines.append("key,value")
        for key, text in rows:
            lines.append(f"{key},{text}")
    return "\n".join(lines) + "\n"
