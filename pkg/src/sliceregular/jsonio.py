"""JSON interchange for series, points, and reports.

Quaternions serialize as [w, x, y, z]; a series as
{"radius": R, "coeffs": [[w, x, y, z], ...]}. All emitted documents embed the
run configuration that produced them so outputs are reproducible byte for
byte from (seed, grid) on one platform.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .quaternion import Quaternion, as_quaternion
from .series import SliceSeries


def quaternion_to_json(q) -> list[float]:
    return as_quaternion(q).to_list()


def quaternion_from_json(data) -> Quaternion:
    if not isinstance(data, (list, tuple)) or len(data) != 4:
        raise ValueError("quaternion JSON must be a [w, x, y, z] array")
    return Quaternion.from_array(data)


def series_to_dict(f: SliceSeries) -> dict:
    return {"radius": f.radius, "coeffs": [list(map(float, row)) for row in f.coeffs]}


def series_from_dict(data: dict) -> SliceSeries:
    if "coeffs" not in data:
        raise ValueError("series JSON needs a 'coeffs' field")
    coeffs = np.array(data["coeffs"], dtype=float)
    return SliceSeries(coeffs, float(data.get("radius", 1.0)))


def load_series(path) -> SliceSeries:
    with open(path, "r", encoding="utf-8") as fh:
        return series_from_dict(json.load(fh))


def dump_series(f: SliceSeries, path) -> None:
    Path(path).write_text(dumps(series_to_dict(f)), encoding="utf-8")


def load_points(path) -> np.ndarray:
    """A points file is a JSON array of [w, x, y, z] arrays."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    arr = np.array(data, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError("points JSON must be an array of [w, x, y, z] arrays")
    return arr


def dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")
