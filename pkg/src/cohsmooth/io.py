"""JSON (de)serialization of states, channels and reports.

Matrices are nested lists ``[[[re, im], ...], ...]``.  Floats go through
Python's shortest round-trip repr, so a written state re-parses to the
bit-identical matrix.
"""
from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .states import DensityMatrix, KrausChannel, ValidationError


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"matrix entries must be [re, im] pairs: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValidationError(f"matrix must have shape (rows, cols, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_json(rho) -> dict:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return {"dim": int(m.shape[0]), "matrix": matrix_to_json(m)}


def state_from_json(data, *, repair: bool = False) -> DensityMatrix:
    if not isinstance(data, dict) or "matrix" not in data:
        raise ValidationError("state JSON needs a 'matrix' field")
    unknown = set(data) - {"dim", "matrix"}
    if unknown:
        raise ValidationError(f"unknown keys in state JSON: {sorted(unknown)}")
    m = matrix_from_json(data["matrix"])
    if "dim" in data and int(data["dim"]) != m.shape[0]:
        raise ValidationError(f"dim {data['dim']} does not match matrix size {m.shape[0]}")
    return DensityMatrix(m, repair=repair)


def channel_to_json(ch: KrausChannel) -> dict:
    return {"kraus": [matrix_to_json(k) for k in ch.operators], "dims": list(ch.dims)}


def channel_from_json(data) -> KrausChannel:
    if not isinstance(data, dict) or "kraus" not in data:
        raise ValidationError("channel JSON needs a 'kraus' field")
    ops = [matrix_from_json(k) for k in data["kraus"]]
    ch = KrausChannel(ops)
    if "dims" in data and list(data["dims"]) != list(ch.dims):
        raise ValidationError(f"dims {data['dims']} do not match operators {list(ch.dims)}")
    return ch


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed separators)."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def load_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc})") from None


def load_state(path, *, repair: bool = False) -> DensityMatrix:
    return state_from_json(load_json(path), repair=repair)


def save_state(path, rho) -> None:
    Path(path).write_text(dumps(state_to_json(rho)))


def load_channel(path) -> KrausChannel:
    return channel_from_json(load_json(path))


def save_channel(path, ch: KrausChannel) -> None:
    Path(path).write_text(dumps(channel_to_json(ch)))


CSV_COLUMNS = ("prop_id", "samples", "violations", "skipped", "max_slack")


def reports_to_csv(reports) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        d = r if isinstance(r, dict) else r.to_dict()
        w.writerow([d[c] if c != "max_slack" else repr(float(d[c])) for c in CSV_COLUMNS])
    return buf.getvalue()
