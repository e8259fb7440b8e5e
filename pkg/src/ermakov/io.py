"""CSV/JSON serialization of sampled runs.

Numbers are written with 17 significant digits, which round-trips every
double exactly. Non-finite values are written as ``nan``/``inf`` in CSV and
as ``null`` in JSON. Column order and key order are fixed so identical runs
produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .core import HamiltonianSpec, PhaseState, hamiltonian, lrri
from .integrators import Trajectory
from .quadrature import QuadratureSolution

FORMATS = ("csv", "json")


def format_number(v: float) -> str:
    return format(float(v), ".17g")


def trajectory_columns(run: "Trajectory | QuadratureSolution") -> dict[str, np.ndarray]:
    """Ordered columns ``t, x, y, px, py, H, I`` (+ ``tau, q, s`` for quadrature runs).

    For a quadrature run, H and I are re-evaluated at every reconstructed state.
    """
    if isinstance(run, Trajectory):
        return {c: np.asarray(getattr(run, c), dtype=float) for c in Trajectory.COLUMNS}
    if isinstance(run, QuadratureSolution):
        spec: HamiltonianSpec = run.spec
        states = [PhaseState(*r) for r in zip(run.t, run.x, run.y, run.px, run.py)]
        cols = {"t": run.t, "x": run.x, "y": run.y, "px": run.px, "py": run.py,
                "H": np.array([hamiltonian(spec, s) for s in states]),
                "I": np.array([lrri(spec, s) for s in states]),
                "tau": run.tau, "q": run.q, "s": run.s}
        return {k: np.asarray(v, dtype=float) for k, v in cols.items()}
    raise TypeError(f"cannot serialize {type(run).__name__}")


def _check_columns(columns: Mapping[str, Any]) -> int:
    lengths = {len(v) for v in columns.values()}
    if len(lengths) != 1:
        raise ValueError("columns have different lengths")
    n = lengths.pop()
    if n == 0:
        raise ValueError("empty table")
    return n


def write_csv(columns: Mapping[str, Any], path: "str | Path") -> Path:
    path = Path(path)
    n = _check_columns(columns)
    names = list(columns)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for i in range(n):
            w.writerow([format_number(columns[c][i]) for c in names])
    return path


def _json_number(v: float) -> str:
    v = float(v)
    return format_number(v) if math.isfinite(v) else "null"


def _json_value(v: Any, indent: int) -> str:
    """JSON text with floats at 17 significant digits and sorted keys."""
    pad, inner = " " * indent, " " * (indent + 2)
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, (float, np.floating)):
        return _json_number(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, Mapping):
        if not v:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_json_value(v[k], indent + 2)}" for k in sorted(v, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(v, (list, tuple)):
        if all(isinstance(e, (int, float, np.number)) and not isinstance(e, bool) for e in v):
            return "[" + ", ".join(_json_value(e, 0) for e in v) + "]"
        return "[\n" + ",\n".join(inner + _json_value(e, indent + 2) for e in v) + "\n" + pad + "]"
    raise TypeError(f"cannot encode {type(v).__name__} as JSON")


def dumps_json(obj: Any) -> str:
    return _json_value(obj, 0) + "\n"


def write_json(obj: Any, path: "str | Path") -> Path:
    path = Path(path)
    path.write_text(dumps_json(obj))
    return path


def write_table(columns: Mapping[str, Any], path: "str | Path", fmt: str = "csv",
                metadata: Mapping[str, Any] | None = None) -> Path:
    if fmt == "csv":
        return write_csv(columns, path)
    if fmt == "json":
        _check_columns(columns)
        return write_json({"columns": list(columns), "data": {k: list(v) for k, v in columns.items()},
                           "metadata": dict(metadata or {})}, path)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def serialize_trajectory(run: "Trajectory | QuadratureSolution", path: "str | Path", fmt: str = "csv",
                         metadata: Mapping[str, Any] | None = None) -> Path:
    meta = dict(run.metadata) if isinstance(run, Trajectory) else {"H": run.H, "I": run.I}
    meta.update(metadata or {})
    return write_table(trajectory_columns(run), path, fmt, meta)


def read_table(path: "str | Path") -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    """Read a table written by :func:`write_table`; returns (columns, metadata)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        obj = json.loads(text)
        cols = {k: np.array([np.nan if v is None else v for v in obj["data"][k]], dtype=float)
                for k in obj["columns"]}
        return cols, obj.get("metadata", {})
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    cols = {h: np.array([float(r[i]) for r in body], dtype=float) for i, h in enumerate(header)}
    return cols, {}
