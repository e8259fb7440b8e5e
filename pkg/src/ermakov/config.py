"""Run configuration files (TOML or JSON).

Layout::

    [system]                    # exactly one source
    catalog = "calogero"        #   catalog name + [system.params]
    # A, B, C, Lambda, F_integral | F, lower_limit     (raw Hamiltonian spec)
    # omega2, f, g, lower_limit                        (generic ELRR system)

    [initial]                   # t (default 0), x, y, px, py
                                # (vx, vy instead of px, py for generic systems)
    [run]                       # t_end, pipeline, samples
    [integrator]                # method, abs_tol, rel_tol, step, max_steps,
                                # record_every, symplectic_order
    [output]                    # dir, format, name
    [tolerances]                # compare, drift, constraint
    [check]                     # s_min, s_max, n, method, margin

Every rejection raises :class:`ConfigError` naming the offending field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import tomli

from .core import GenericElrrSystem, HamiltonianSpec, PhaseState
from .errors import ConfigError, ExpressionSyntaxError
from .expression import as_expression
from .functions import RealFunction
from .integrators import ADAPTIVE, METHODS, IntegratorConfig
from .io import FORMATS
from .models import CATALOG, catalog_spec

PIPELINES = ("integrate", "quadrature", "closed-form", "compare")
SECTIONS = ("system", "initial", "run", "integrator", "output", "tolerances", "check")
_RAW_KEYS = {"A", "B", "C", "Lambda", "F_integral", "F", "lower_limit", "name"}
_GENERIC_KEYS = {"omega2", "f", "g", "lower_limit", "name"}


@dataclass(frozen=True)
class SystemSource:
    """Where the system comes from: ``kind`` is catalog, raw or generic."""

    kind: str
    catalog: str | None = None
    params: Mapping[str, Any] = field(default_factory=dict)
    expressions: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Tolerances:
    compare: float = 1e-6
    drift: float | None = 1e-8
    constraint: float = 1e-8


@dataclass(frozen=True)
class CheckSettings:
    s_min: float = -3.0
    s_max: float = 3.0
    n: int = 100
    method: str = "analytic"
    margin: float = 1e-3


@dataclass(frozen=True)
class RunSpec:
    source: SystemSource
    initial: PhaseState | None
    t_end: float | None
    pipeline: str = "integrate"
    samples: int = 1001
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    out_dir: Path = Path(".")
    fmt: str = "csv"
    name: str = "run"
    tolerances: Tolerances = field(default_factory=Tolerances)
    check: CheckSettings = field(default_factory=CheckSettings)
    seed: int | None = None

    def build_system(self) -> "HamiltonianSpec | GenericElrrSystem":
        return build_system(self.source)


# -- loading ---------------------------------------------------------------------


def load_config_file(path: "str | Path") -> dict[str, Any]:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", "config") from exc
    text = raw.decode("utf-8", errors="replace")
    is_json = path.suffix.lower() == ".json" or (path.suffix.lower() != ".toml" and text.lstrip().startswith("{"))
    try:
        data = json.loads(text) if is_json else tomli.loads(text)
    except (json.JSONDecodeError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}", "config") from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be a table", "config")
    return data


def load_run_spec(path: "str | Path", overrides: Mapping[str, Any] | None = None,
                  require_run: bool = True) -> RunSpec:
    data = load_config_file(path)
    data.setdefault("output", {})
    if isinstance(data["output"], dict):
        data["output"].setdefault("name", Path(path).stem)
    return parse_run_spec(data, overrides, require_run)


def _table(data: Mapping[str, Any], key: str, required: bool = False) -> dict[str, Any]:
    if key not in data:
        if required:
            raise ConfigError("missing section", key)
        return {}
    val = data[key]
    if not isinstance(val, dict):
        raise ConfigError("must be a table", key)
    return dict(val)


def _number(tbl: dict, key: str, section: str, default: Any = ..., positive: bool = False,
            integer: bool = False) -> Any:
    name = f"{section}.{key}"
    if key not in tbl:
        if default is ...:
            raise ConfigError("missing required value", name)
        return default
    v = tbl.pop(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", name)
    if integer and not isinstance(v, int):
        raise ConfigError(f"expected an integer, got {v!r}", name)
    if not math.isfinite(v):
        raise ConfigError("must be finite", name)
    if positive and not v > 0:
        raise ConfigError(f"must be positive, got {v!r}", name)
    return v


def _choice(tbl: dict, key: str, section: str, choices, default: str) -> str:
    v = tbl.pop(key, default)
    if v not in choices:
        raise ConfigError(f"expected one of {list(choices)}, got {v!r}", f"{section}.{key}")
    return v


def _reject_extra(tbl: dict, section: str) -> None:
    if tbl:
        k = sorted(tbl)[0]
        raise ConfigError("unknown key", f"{section}.{k}")


def _parse_source(tbl: dict) -> SystemSource:
    if "catalog" in tbl:
        name = tbl.pop("catalog")
        if name not in CATALOG:
            raise ConfigError(f"unknown catalog system {name!r}; known: {sorted(CATALOG)}", "system.catalog")
        params = tbl.pop("params", {})
        if not isinstance(params, dict):
            raise ConfigError("must be a table", "system.params")
        allowed = set(CATALOG[name].param_names)
        for k in params:
            if k not in allowed:
                raise ConfigError(f"unknown parameter for {name}", f"system.params.{k}")
        if tbl:
            raise ConfigError("catalog systems take no other keys (exactly one system source)",
                              f"system.{sorted(tbl)[0]}")
        source = SystemSource("catalog", name, params)
        build_system(source)
        return source
    keys = set(tbl)
    if keys & {"omega2", "f", "g"}:
        if keys & (_RAW_KEYS - {"lower_limit", "name"}):
            raise ConfigError("mixes raw Hamiltonian and generic ELRR keys (exactly one system source)", "system")
        kind, allowed, required = "generic", _GENERIC_KEYS, ("omega2",)
    elif keys & {"A", "B", "C"}:
        kind, allowed, required = "raw", _RAW_KEYS, ("A", "B", "C")
    else:
        raise ConfigError("no system source: give catalog, A/B/C/Lambda or omega2/f/g", "system")
    for k in sorted(keys):
        if k not in allowed:
            raise ConfigError("unknown key", f"system.{k}")
    for k in required:
        if k not in tbl:
            raise ConfigError("missing required value", f"system.{k}")
    if kind == "raw" and "F" in tbl and "F_integral" in tbl:
        raise ConfigError("give either F or F_integral, not both", "system.F")
    source = SystemSource(kind, expressions=dict(tbl))
    build_system(source)  # parse expressions now so errors carry field names
    return source


_EXPR_VARS = {"Lambda": ("q", "t"), "F_integral": ("s",), "F": ("s",),
              "omega2": ("x", "y", "t"), "f": ("s",), "g": ("u",)}


def _expr_function(exprs: Mapping[str, Any], key: str, default: str | None = None) -> RealFunction:
    value = exprs.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ConfigError(f"expected an expression string or number, got {value!r}", f"system.{key}")
    try:
        return RealFunction.from_expression(value, _EXPR_VARS[key])
    except ExpressionSyntaxError as exc:
        raise ConfigError(str(exc), f"system.{key}") from exc


def build_system(source: SystemSource) -> "HamiltonianSpec | GenericElrrSystem":
    if source.kind == "catalog":
        return catalog_spec(source.catalog, source.params)
    ex = source.expressions
    if source.kind == "raw":
        coeffs = []
        for k in ("A", "B", "C"):
            v = ex[k]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"expected a finite number, got {v!r}", f"system.{k}")
            coeffs.append(float(v))
        if coeffs[0] * coeffs[2] - coeffs[1] ** 2 == 0:
            raise ConfigError("AC - B^2 = 0: the kinetic form is degenerate", "system.A")
        for k in ("Lambda", "F_integral", "F"):
            if k in ex:
                _expr_function(ex, k)
        lower = ex.get("lower_limit", 1.0)
        if isinstance(lower, bool) or not isinstance(lower, (int, float)):
            raise ConfigError(f"expected a number, got {lower!r}", "system.lower_limit")
        name = ex.get("name", "custom")
        return HamiltonianSpec.from_expressions(
            *coeffs, ex.get("Lambda", "q"), F_integral=_opt_expr(ex, "F_integral"),
            F=_opt_expr(ex, "F"), lower_limit=float(lower), name=str(name))
    w2 = _expr_function(ex, "omega2")
    f = _expr_function(ex, "f", "0")
    g = _expr_function(ex, "g", "0")
    return GenericElrrSystem(f, g, w2, str(ex.get("name", "generic")))


def _opt_expr(ex: Mapping[str, Any], key: str):
    if key not in ex:
        return None
    v = ex[key]
    return as_expression(v, _EXPR_VARS[key])


def parse_run_spec(data: Mapping[str, Any], overrides: Mapping[str, Any] | None = None,
                   require_run: bool = True) -> RunSpec:
    """Validate a config mapping. ``overrides`` holds CLI flags (``t_end``,
    ``abs_tol``, ``rel_tol``, ``out_dir``, ``fmt``, ``seed``), which win over the file.

    With ``require_run=False`` (constraint checks) the initial state and
    ``run.t_end`` may be omitted.
    """
    for k in data:
        if k not in SECTIONS:
            raise ConfigError("unknown section", str(k))
    ov = {k: v for k, v in (overrides or {}).items() if v is not None}
    source = _parse_source(_table(data, "system", required=True))
    generic = source.kind == "generic"

    run = _table(data, "run")
    pipeline = _choice(run, "pipeline", "run", PIPELINES, "integrate")
    file_t_end = _number(run, "t_end", "run", None if not require_run or "t_end" in ov else ...)
    t_end = ov.get("t_end", file_t_end)
    samples = _number(run, "samples", "run", 1001, positive=True, integer=True)
    if samples < 2:
        raise ConfigError("need at least 2 samples", "run.samples")
    _reject_extra(run, "run")

    initial = None
    if "initial" in data or require_run:
        ini = _table(data, "initial", required=True)
        pk = ("vx", "vy") if generic else ("px", "py")
        vals = [_number(ini, "t", "initial", 0.0)] + [_number(ini, k, "initial") for k in ("x", "y", *pk)]
        _reject_extra(ini, "initial")
        initial = PhaseState(*[float(v) for v in vals])
    if t_end is not None:
        if isinstance(t_end, bool) or not isinstance(t_end, (int, float)) or not math.isfinite(t_end):
            raise ConfigError(f"expected a finite number, got {t_end!r}", "run.t_end")
        if initial is not None and not t_end > initial.t:
            raise ConfigError("must exceed initial.t", "run.t_end")
        t_end = float(t_end)

    integ = _table(data, "integrator")
    method = _choice(integ, "method", "integrator", METHODS, ADAPTIVE)
    abs_tol = ov.get("abs_tol") or _number(integ, "abs_tol", "integrator", 1e-10, positive=True)
    rel_tol = ov.get("rel_tol") or _number(integ, "rel_tol", "integrator", 1e-10, positive=True)
    integ.pop("abs_tol", None), integ.pop("rel_tol", None)
    step = _number(integ, "step", "integrator", 1e-3, positive=True)
    max_steps = _number(integ, "max_steps", "integrator", 10_000_000, positive=True, integer=True)
    record_every = _number(integ, "record_every", "integrator", 1, positive=True)
    order = _number(integ, "symplectic_order", "integrator", 2, integer=True)
    if order not in (2, 4):
        raise ConfigError("must be 2 or 4", "integrator.symplectic_order")
    _reject_extra(integ, "integrator")
    if generic and (method != ADAPTIVE or pipeline != "integrate"):
        raise ConfigError("generic ELRR systems support only the adaptive integrate pipeline",
                          "run.pipeline" if pipeline != "integrate" else "integrator.method")
    cfg = IntegratorConfig(method, float(abs_tol), float(rel_tol), float(step), int(max_steps),
                           record_every, int(order))

    out = _table(data, "output")
    out_dir = Path(ov.get("out_dir") or out.pop("dir", "."))
    out.pop("dir", None)
    fmt = ov.get("fmt") or _choice(out, "format", "output", FORMATS, "csv")
    out.pop("format", None)
    if fmt not in FORMATS:
        raise ConfigError(f"expected one of {list(FORMATS)}, got {fmt!r}", "output.format")
    name = out.pop("name", "run")
    if not isinstance(name, str) or not name or "/" in name:
        raise ConfigError(f"invalid output name {name!r}", "output.name")
    _reject_extra(out, "output")

    tol = _table(data, "tolerances")
    drift_default = 1e-8 if method == ADAPTIVE else None
    tolerances = Tolerances(
        _number(tol, "compare", "tolerances", 1e-6, positive=True),
        _number(tol, "drift", "tolerances", drift_default, positive=True),
        _number(tol, "constraint", "tolerances", 1e-8, positive=True),
    )
    _reject_extra(tol, "tolerances")

    chk = _table(data, "check")
    check = CheckSettings(
        float(_number(chk, "s_min", "check", -3.0)), float(_number(chk, "s_max", "check", 3.0)),
        int(_number(chk, "n", "check", 100, positive=True, integer=True)),
        _choice(chk, "method", "check", ("analytic", "fd"), "analytic"),
        float(_number(chk, "margin", "check", 1e-3, positive=True)),
    )
    if not check.s_max > check.s_min:
        raise ConfigError("must exceed check.s_min", "check.s_max")
    _reject_extra(chk, "check")

    seed = ov.get("seed")
    return RunSpec(source, initial, t_end, pipeline, int(samples), cfg, out_dir, fmt, name,
                   tolerances, check, seed)

