"""Algebra file loading and deterministic report serialization."""
from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, catalog
from .algebra import AlgebraVector, MetricNilpotentAlgebra, validate_algebra
from .analytic import ConjugatePoint

CSV_COLUMNS = ("t0", "multiplicity", "branch", "residual")


def load_algebra(source: str) -> MetricNilpotentAlgebra:
    """``catalog:NAME`` or a path to an algebra JSON file."""
    if source.startswith("catalog:"):
        return catalog.by_name(source.split(":", 1)[1])
    path = Path(source)
    with path.open() as fh:
        raw = json.load(fh)
    return validate_algebra(raw, name=raw.get("name", path.stem))


def dump_algebra(alg: MetricNilpotentAlgebra) -> str:
    return dumps(alg.to_dict())


@dataclass
class RunReport:
    command: str
    algebra_id: str
    ic: dict[str, Any] | None = None
    config: dict[str, Any] = field(default_factory=dict)
    results: list[Any] = field(default_factory=list)
    mismatches: list[Any] = field(default_factory=list)
    version: str = __version__

    def to_json(self) -> str:
        return dumps(dataclasses.asdict(self))


def ic_record(ic) -> dict[str, Any]:
    return {
        "z0": ic.z0.z_part.tolist(),
        "x0": ic.x0.v_part.tolist(),
        "a": ic.a,
        "b": ic.b,
        "g": ic.g,
    }


def point_record(cp: ConjugatePoint) -> dict[str, Any]:
    return {
        "t0": cp.t0,
        "multiplicity": cp.multiplicity,
        "branch": cp.branch.value,
        "residual": cp.residual,
        "flags": list(cp.flags),
    }


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _encode(obj: Any) -> str:
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, enum.Enum):
        return _encode(obj.value)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, AlgebraVector):
        return _encode(obj.to_array().tolist())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _encode(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """JSON with sorted keys and every float written with 17 significant digits."""
    return _encode(obj)


def points_csv(points: list[ConjugatePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for cp in points:
        writer.writerow([format(cp.t0, ".17g"), cp.multiplicity, cp.branch.value, format(cp.residual, ".17g")])
    return buf.getvalue()
