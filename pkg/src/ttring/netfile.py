"""Text file format for trains and rings.

A network is one JSON object::

    {"format": "ttring-network", "version": 1,
     "kind": "tt" | "tr" | "tt_matrix" | "tr_matrix",
     "dims": [...], "col_dims": [...],      # col_dims only for matrix kinds
     "ranks": [r_1, ..., r_d, r_{d+1}],
     "cores": [[...], ...]}                  # one flat list per core

Each core is flattened column-major: left rank fastest, then the row mode,
the column mode (matrices), and the right rank. Floats are written with
Python's shortest round-trip repr, so reading back gives identical bits.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .tr import RingMatrix, TensorRing
from .tt import TensorTrain, TrainMatrix

FORMAT_NAME = "ttring-network"
FORMAT_VERSION = 1

KIND_CLASSES = {
    "tt": TensorTrain,
    "tr": TensorRing,
    "tt_matrix": TrainMatrix,
    "tr_matrix": RingMatrix,
}


class NetworkFormatError(ValueError):
    """Malformed network document; ``field`` names the offending key."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


def kind_of(x) -> str:
    for name, cls in KIND_CLASSES.items():
        if type(x) is cls:
            return name
    raise TypeError(f"cannot serialize {type(x).__name__}")


def to_dict(x) -> dict:
    kind = kind_of(x)
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": kind,
        "dims": [c.shape[1] for c in x.cores],
    }
    if kind.endswith("matrix"):
        doc["col_dims"] = [c.shape[2] for c in x.cores]
    doc["ranks"] = list(x.ranks)
    doc["cores"] = [c.ravel(order="F").tolist() for c in x.cores]
    return doc


def dumps(x) -> str:
    return json.dumps(to_dict(x), allow_nan=False)


def _int_list(doc: dict, key: str, length: int | None = None) -> list[int]:
    if key not in doc:
        raise NetworkFormatError(key, "missing")
    v = doc[key]
    if not isinstance(v, list) or not all(isinstance(n, int) and not isinstance(n, bool) for n in v):
        raise NetworkFormatError(key, "must be a list of integers")
    if any(n < 1 for n in v):
        raise NetworkFormatError(key, "entries must be >= 1")
    if length is not None and len(v) != length:
        raise NetworkFormatError(key, f"expected {length} entries, got {len(v)}")
    return v


def from_dict(doc) -> TensorTrain | TrainMatrix | TensorRing | RingMatrix:
    if not isinstance(doc, dict):
        raise NetworkFormatError("document", "top level must be an object")
    if doc.get("format", FORMAT_NAME) != FORMAT_NAME:
        raise NetworkFormatError("format", f"expected {FORMAT_NAME!r}, got {doc.get('format')!r}")
    if doc.get("version", FORMAT_VERSION) != FORMAT_VERSION:
        raise NetworkFormatError("version", f"unsupported version {doc.get('version')!r}")
    kind = doc.get("kind")
    if kind not in KIND_CLASSES:
        raise NetworkFormatError("kind", f"must be one of {sorted(KIND_CLASSES)}, got {kind!r}")
    dims = _int_list(doc, "dims")
    d = len(dims)
    if d == 0:
        raise NetworkFormatError("dims", "must not be empty")
    matrix = kind.endswith("matrix")
    col_dims = _int_list(doc, "col_dims", d) if matrix else None
    ranks = _int_list(doc, "ranks", d + 1)
    if ranks[0] != ranks[-1]:
        raise NetworkFormatError("ranks", "first and last ranks must match")
    if kind.startswith("tt") and ranks[0] != 1:
        raise NetworkFormatError("ranks", "train boundary ranks must be 1")
    raw = doc.get("cores")
    if not isinstance(raw, list):
        raise NetworkFormatError("cores", "missing or not a list")
    if len(raw) != d:
        raise NetworkFormatError("cores", f"expected {d} cores, got {len(raw)}")
    cores = []
    for k, flat in enumerate(raw):
        shape = (ranks[k], dims[k]) + ((col_dims[k],) if matrix else ()) + (ranks[k + 1],)
        name = f"cores[{k}]"
        if not isinstance(flat, list):
            raise NetworkFormatError(name, "must be a list of numbers")
        if len(flat) != math.prod(shape):
            raise NetworkFormatError(
                name, f"has {len(flat)} values but shape {shape} needs {math.prod(shape)}"
            )
        try:
            arr = np.array(flat, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise NetworkFormatError(name, "contains non-numeric values") from exc
        if arr.ndim != 1 or not np.all(np.isfinite(arr)):
            raise NetworkFormatError(name, "values must be finite numbers")
        cores.append(arr.reshape(shape, order="F"))
    return KIND_CLASSES[kind](cores, copy=False)


def loads(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError("document", f"not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    return from_dict(doc)


def save(x, path) -> None:
    Path(path).write_text(dumps(x) + "\n")


def load(path):
    return loads(Path(path).read_text())
