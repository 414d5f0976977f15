"""Versioned file formats: JSON records and commented CSV tables.

Complex numbers are always written as [re, im] pairs. Every file starts with
its format_version (the first JSON key, or the first CSV comment line).
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ValidationError

FORMAT_VERSION = 1


def pairs(z) -> list:
    return [[float(c.real), float(c.imag)] for c in np.atleast_1d(np.asarray(z, dtype=complex))]


def from_pairs(p) -> np.ndarray:
    try:
        return np.array([complex(re, im) for re, im in p], dtype=complex)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"expected a list of [re, im] pairs, got {p!r}") from e


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(payload: dict) -> str:
    return json.dumps({"format_version": FORMAT_VERSION, **_clean(payload)}, indent=2) + "\n"


def write_json(path, payload: dict):
    text = dumps(payload)
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        Path(path).write_text(text)


def read_json(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as e:
        raise ValidationError(f"input file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    v = data.get("format_version")
    if v != FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported format_version {v!r} (expected {FORMAT_VERSION})")
    return data


def write_csv(path, header: list[str], rows, meta: dict | None = None):
    """Comment lines (# key: json) followed by a header row and the data."""
    lines = [f"# format_version: {FORMAT_VERSION}"]
    for k, v in (meta or {}).items():
        lines.append(f"# {k}: {json.dumps(_clean(v))}")
    out = "\n".join(lines) + "\n"
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    out += buf.getvalue()
    if path is None or str(path) == "-":
        print(out, end="")
    else:
        Path(path).write_text(out)


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    meta = {}
    body = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].partition(":")
            meta[k.strip()] = json.loads(v)
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def complex_columns(name: str, count: int, start: int = 0) -> list[str]:
    cols = []
    for i in range(start, start + count):
        cols += [f"{name}{i}.re", f"{name}{i}.im"]
    return cols
