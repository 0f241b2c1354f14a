"""JSON file formats and canonical serialization."""

from __future__ import annotations

import json
import math

import numpy as np

from .correlation import CorrelationTable, ExperimentShape, LhvModel
from .errors import StructuralError
from .family import BellCoefficients
from .polytope import PointSet
from .quantum import DensityMatrix, ObservableSet


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if not math.isfinite(x):
            raise StructuralError("non-finite number in output")
        return x + 0.0  # folds -0.0
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj):
    """Canonical JSON: sorted keys, shortest round-trip floats, trailing newline."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise StructuralError(f"{path}: invalid JSON ({exc})") from None


def _require(data, *keys):
    if not isinstance(data, dict):
        raise StructuralError("expected a JSON object")
    missing = [k for k in keys if k not in data]
    if missing:
        raise StructuralError(f"missing keys {missing}")


def shape_from_dict(data):
    _require(data, "n", "m", "v")
    return ExperimentShape(int(data["n"]), int(data["m"]), int(data["v"]))


def table_to_dict(table):
    entries = {}
    for (s, a), p in table.entries().items():
        entries["s=" + "".join(map(str, s)) + ";a=" + "".join(map(str, a))] = p
    return {"shape": table.shape.to_dict(), "entries": entries}


def table_from_dict(data):
    _require(data, "shape", "entries")
    shape = shape_from_dict(data["shape"])
    return CorrelationTable.from_entries(shape, {k: float(v) for k, v in data["entries"].items()})


def model_to_dict(model):
    return {
        "shape": model.shape.to_dict(),
        "states": [
            {"weight": float(w), "responses": r.tolist()}
            for w, r in zip(model.weights, model.responses)
        ],
    }


def model_from_dict(data):
    _require(data, "shape", "states")
    shape = shape_from_dict(data["shape"])
    weights = [float(s["weight"]) for s in data["states"]]
    responses = [s["responses"] for s in data["states"]]
    return LhvModel(shape, weights, responses)


def beta_from_dict(data):
    _require(data, "version", "n", "beta")
    return BellCoefficients.from_dict(data)


def polytope_from_dict(data):
    _require(data, "dimension", "vertices")
    return PointSet.from_dict(data)


def state_from_dict(data):
    _require(data, "site_dims", "matrix")
    return DensityMatrix.from_dict(data)


def observables_from_dict(data):
    _require(data, "observables")
    return ObservableSet.from_dict(data)


def parse_grid(text):
    """``start:stop:step`` with ``stop`` included when within half a step."""
    parts = text.split(":")
    if len(parts) != 3:
        raise StructuralError(f"grid must be start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if step <= 0:
        raise StructuralError("grid step must be positive")
    if stop < start:
        raise StructuralError("grid stop must not be below start")
    count = int(math.ceil((stop - start) / step - 0.5)) + 1
    return [round(start + k * step, 12) for k in range(count)]
