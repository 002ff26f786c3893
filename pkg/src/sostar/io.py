"""JSON and CSV formats shared by the command line and scripts."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError
from .group import BlockGroupElement


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"n": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    """Parse ``{"n", "re", "im"}``; ``im`` may be omitted for real input."""
    try:
        n = int(obj["n"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (n, n) or im.shape != (n, n):
        raise ParseError(f"expected {n}x{n} re/im arrays, got {re.shape} and {im.shape}")
    return re + 1j * im


def group_to_json(g: BlockGroupElement) -> dict:
    return {"a": matrix_to_json(g.a), "b": matrix_to_json(g.b)}


def group_from_json(obj) -> BlockGroupElement:
    try:
        return BlockGroupElement(matrix_from_json(obj["a"]), matrix_from_json(obj["b"]))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed group element JSON: {exc}") from exc


def spinors_to_json(spinors) -> list:
    z = np.asarray(spinors, dtype=complex)
    return [{"x": [float(s[0].real), float(s[0].imag)], "y": [float(s[1].real), float(s[1].imag)]} for s in z]


def spinors_from_json(obj) -> np.ndarray:
    try:
        return np.array([[complex(*s["x"]), complex(*s["y"])] for s in obj], dtype=complex).reshape(-1, 2)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed spinor JSON: {exc}") from exc


def load_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ParseError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_matrix(path) -> np.ndarray:
    return matrix_from_json(load_json(path))


def _clean(obj):
    """Make numpy scalars and non-finite floats JSON safe."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def distribution_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["J", "P"])
    for j, p in rows:
        writer.writerow([int(j), format(float(p), ".15g")])
    return buf.getvalue()
