"""Execution of a validated :class:`RunSpec`.

Each pipeline writes its artifacts under ``out_dir`` with the run name as
prefix and returns a :class:`RunResult`. Tolerance violations give exit code
4 after the artifacts are written; typed errors propagate to the caller with
a ``context`` attribute naming the pipeline and the initial state.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .config import RunSpec
from .core import GenericElrrSystem, HamiltonianSpec, PhaseState, constraint_residual, reduce_system
from .errors import ConfigError, DomainError, ErmakovError
from .integrators import ADAPTIVE, IntegratorConfig, drift_report, integrate, integrate_elrr
from .io import serialize_trajectory, write_json, write_table
from .models import (
    CalogeroOrbit,
    CalogeroParams,
    NoncentralOrbit,
    NoncentralParams,
)
from .quadrature import quadrature_pipeline

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_TOLERANCE = 0, 2, 3, 4


@dataclass
class RunResult:
    exit_code: int
    outputs: list[Path] = field(default_factory=list)
    report: dict[str, Any] = field(default_factory=dict)
    messages: list[str] = field(default_factory=list)


def _path(rs: RunSpec, suffix: str, ext: str | None = None) -> Path:
    rs.out_dir.mkdir(parents=True, exist_ok=True)
    return rs.out_dir / f"{rs.name}_{suffix}.{ext or rs.fmt}"


def _state_dict(st: PhaseState | None) -> dict[str, float] | None:
    return None if st is None else asdict(st)


def _with_context(rs: RunSpec, pipeline: str, fn: Callable[[], RunResult]) -> RunResult:
    try:
        return fn()
    except ErmakovError as exc:
        exc.context = {"pipeline": pipeline, "initial": _state_dict(rs.initial)}
        raise


def _require_initial(rs: RunSpec) -> PhaseState:
    if rs.initial is None:
        raise ConfigError("missing section", "initial")
    if rs.t_end is None:
        raise ConfigError("missing required value", "run.t_end")
    return rs.initial


def _require_spec(system, field_name: str = "system") -> HamiltonianSpec:
    if not isinstance(system, HamiltonianSpec):
        raise ConfigError("this pipeline needs a Hamiltonian spec, not a generic ELRR system", field_name)
    return system


def run(rs: RunSpec) -> RunResult:
    """Execute ``rs.pipeline``."""
    pipelines = {"integrate": run_integrate, "quadrature": run_quadrature,
                 "closed-form": run_closed_form, "compare": run_compare}
    return _with_context(rs, rs.pipeline, lambda: pipelines[rs.pipeline](rs))


# -- integrate ---------------------------------------------------------------------


def run_integrate(rs: RunSpec) -> RunResult:
    initial = _require_initial(rs)
    system = rs.build_system()
    if isinstance(system, GenericElrrSystem):
        traj = integrate_elrr(reduce_system(system), initial, rs.t_end, rs.integrator)
    else:
        traj = integrate(system, initial, rs.t_end, rs.integrator)
    rep = drift_report(traj)
    out = [serialize_trajectory(traj, _path(rs, "integrate"), rs.fmt)]
    report = {
        "pipeline": "integrate", "system": traj.metadata["system"], "method": rs.integrator.method,
        "samples": len(traj), "max_drift_H": rep.max_drift_H, "max_drift_I": rep.max_drift_I,
        "mean_drift_H": rep.mean_drift_H, "mean_drift_I": rep.mean_drift_I,
        "H0": float(traj.H[0]), "I0": float(traj.I[0]), "step_stats": rep.step_stats,
        "tolerance_drift": rs.tolerances.drift,
    }
    code, msgs = EXIT_OK, []
    tol = rs.tolerances.drift
    # H is only conserved when Lambda does not depend on t
    checked = [("I", rep.max_drift_I)]
    if not getattr(system, "lambda_time_dependent", True):
        checked.insert(0, ("H", rep.max_drift_H))
    report["conserved_checked"] = [name for name, _ in checked]
    if tol is not None:
        for name, v in checked:
            if math.isfinite(v) and v > tol:
                code = EXIT_TOLERANCE
                msgs.append(f"drift of {name} {v:.3e} exceeds tolerance {tol:.1e}")
    report["passed"] = code == EXIT_OK
    out.append(write_json(report, _path(rs, "drift", "json")))
    msgs.insert(0, f"integrate: max drift H {rep.max_drift_H:.3e}, I {rep.max_drift_I:.3e}")
    return RunResult(code, out, report, msgs)


# -- quadrature --------------------------------------------------------------------


def _events(sol) -> list[dict[str, Any]]:
    return [{"variable": e.variable, "tau": e.tau, "t": e.t, "value": e.value, "rhs": e.rhs}
            for e in sol.events]


def run_quadrature(rs: RunSpec) -> RunResult:
    initial = _require_initial(rs)
    spec = _require_spec(rs.build_system())
    sol = quadrature_pipeline(spec, initial, rs.t_end, rs.samples)
    res_q, res_s = sol.residuals()
    report = {
        "pipeline": "quadrature", "system": spec.name, "H": sol.H, "I": sol.I,
        "q_kind": sol.metadata["q_kind"], "s_kind": sol.metadata["s_kind"],
        "sign_x": sol.metadata["sign_x"], "residual_q": res_q, "residual_s": res_s,
        "tau_end": float(sol.tau[-1]), "turning_points": _events(sol),
    }
    out = [serialize_trajectory(sol, _path(rs, "quadrature"), rs.fmt),
           write_json(report, _path(rs, "quadrature_report", "json"))]
    return RunResult(EXIT_OK, out, report,
                     [f"quadrature: {len(sol.events)} turning points, residuals {res_q:.2e} / {res_s:.2e}"])


# -- closed form -------------------------------------------------------------------


@dataclass
class _ClosedForm:
    labels: tuple[str, str]
    evaluate: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    from_rows: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    constants: dict[str, float]


def closed_form_for(rs: RunSpec) -> _ClosedForm:
    """Closed-form evaluator for catalog systems that have one."""
    src = rs.source
    initial = _require_initial(rs)
    if src.kind == "catalog" and src.catalog == "calogero":
        p = CalogeroParams(**src.params)
        if not (p.g1 == p.g2 == p.g3):
            raise ConfigError("the closed form for s needs g1 = g2 = g3", "system.params")
        orb = CalogeroOrbit.fit(p, initial)
        return _ClosedForm(
            ("q", "s"), lambda T: (orb.q_at(T), orb.s_at(T)),
            lambda R: (R[:, 0] ** 2 + R[:, 1] ** 2, R[:, 1] / R[:, 0]),
            {"H": orb.H, "I": orb.I, "c1": orb.c1, "c2": orb.c2, "sector": orb.sector})
    if src.kind == "catalog" and src.catalog == "noncentral":
        p = NoncentralParams(**src.params)
        orb = NoncentralOrbit.fit(p, initial)
        return _ClosedForm(
            ("r", "cos_theta"), lambda T: (orb.r_at(T), orb.costheta_at(T)),
            lambda R: (np.hypot(R[:, 0], R[:, 1]), R[:, 0] / np.hypot(R[:, 0], R[:, 1])),
            {"H": orb.H, "I": orb.I, "c1": orb.c1, "c2": orb.c2})
    raise ConfigError("closed forms exist only for catalog 'calogero' (equal g) and 'noncentral'",
                      "run.pipeline")


def _time_grid(rs: RunSpec) -> np.ndarray:
    return np.linspace(rs.initial.t, rs.t_end, rs.samples)


def run_closed_form(rs: RunSpec) -> RunResult:
    cf = closed_form_for(rs)
    T = _time_grid(rs)
    a, b = cf.evaluate(T)
    cols = {"t": T, cf.labels[0]: a, cf.labels[1]: b}
    out = [write_table(cols, _path(rs, "closed_form"), rs.fmt, cf.constants)]
    report = {"pipeline": "closed-form", "system": rs.source.catalog, "constants": cf.constants}
    out.append(write_json(report, _path(rs, "closed_form_report", "json")))
    return RunResult(EXIT_OK, out, report, [f"closed-form: {cf.constants}"])


# -- compare -----------------------------------------------------------------------


def run_compare(rs: RunSpec) -> RunResult:
    """Direct integration vs quadrature vs closed form on a common time grid."""
    initial = _require_initial(rs)
    spec = _require_spec(rs.build_system())
    T = _time_grid(rs)
    cfg = rs.integrator
    if cfg.method != ADAPTIVE:
        cfg = IntegratorConfig(ADAPTIVE, cfg.abs_tol, cfg.rel_tol, max_steps=cfg.max_steps)
    traj = integrate(spec, initial, rs.t_end, cfg, keep_dense=True)
    direct = traj.sample(T)
    cols: dict[str, np.ndarray] = {"t": T}
    for k, name in enumerate(("x", "y", "px", "py")):
        cols[name] = direct[:, k]
    errors: dict[str, float] = {}
    skipped: dict[str, str] = {}

    quad = None
    if spec.lambda_time_dependent:
        skipped["quadrature"] = "Lambda depends on t"
    else:
        quad = quadrature_pipeline(spec, initial, rs.t_end, rs.samples).states_at(T)
        for k, name in enumerate(("x", "y", "px", "py")):
            cols[f"{name}_quadrature"] = quad[:, k]
        errors["direct_vs_quadrature"] = float(np.max(np.abs(direct - quad)))

    try:
        cf = closed_form_for(rs)
    except ConfigError as exc:
        cf = None
        skipped["closed_form"] = str(exc)
    if cf is not None:
        a, b = cf.evaluate(T)
        da, db = cf.from_rows(direct)
        cols[f"{cf.labels[0]}_closed"], cols[f"{cf.labels[1]}_closed"] = a, b
        errors[f"direct_vs_closed_{cf.labels[0]}"] = float(np.max(np.abs(da - a)))
        errors[f"direct_vs_closed_{cf.labels[1]}"] = float(np.max(np.abs(db - b)))
        if quad is not None:
            qa, qb = cf.from_rows(quad)
            errors[f"quadrature_vs_closed_{cf.labels[0]}"] = float(np.max(np.abs(qa - a)))
            errors[f"quadrature_vs_closed_{cf.labels[1]}"] = float(np.max(np.abs(qb - b)))

    tol = rs.tolerances.compare
    violations = {k: v for k, v in errors.items() if not v <= tol}
    report = {"pipeline": "compare", "system": spec.name, "samples": len(T), "tolerance": tol,
              "sup_norm_errors": errors, "skipped": skipped, "passed": not violations,
              "direct_method": cfg.method, "direct_abs_tol": cfg.abs_tol, "direct_rel_tol": cfg.rel_tol}
    out = [write_table(cols, _path(rs, "compare"), rs.fmt, {"system": spec.name}),
           write_json(report, _path(rs, "compare_report", "json"))]
    msgs = [f"compare: {k} = {v:.3e}" for k, v in errors.items()]
    msgs += [f"tolerance violated: {k} = {v:.3e} > {tol:.1e}" for k, v in violations.items()]
    return RunResult(EXIT_TOLERANCE if violations else EXIT_OK, out, report, msgs)


# -- constraint check --------------------------------------------------------------


def constraint_grid(rs: RunSpec) -> np.ndarray:
    c = rs.check
    if rs.seed is None:
        return np.linspace(c.s_min, c.s_max, c.n)
    return np.sort(np.random.default_rng(rs.seed).uniform(c.s_min, c.s_max, c.n))


def check_constraint(rs: RunSpec) -> RunResult:
    """Max |residual| of the compatibility condition over an s grid.

    Points within ``check.margin`` of s = 0 or of a root of xi(s) are skipped,
    as are points where F or its antiderivative is undefined.
    """
    def go() -> RunResult:
        spec = _require_spec(rs.build_system())
        grid = constraint_grid(rs)
        roots = _xi_roots(spec)
        used, values, skipped = [], [], 0
        for s in grid:
            if abs(s) < rs.check.margin or any(abs(s - r) < rs.check.margin for r in roots):
                skipped += 1
                continue
            try:
                values.append(abs(constraint_residual(spec, float(s), rs.check.method)))
                used.append(float(s))
            except DomainError:
                skipped += 1
        if not values:
            raise ConfigError("no admissible s in the check grid", "check")
        k = int(np.argmax(values))
        tol = rs.tolerances.constraint
        report = {"system": spec.name, "max_residual": values[k], "at_s": used[k], "evaluated": len(values),
                  "skipped": skipped, "method": rs.check.method, "tolerance": tol, "seed": rs.seed,
                  "passed": values[k] <= tol}
        out = [write_json(report, _path(rs, "constraint", "json"))]
        msgs = [f"max |constraint residual| = {values[k]:.3e} at s = {used[k]:.6g} "
                f"({len(values)} points, {skipped} skipped)"]
        code = EXIT_OK if values[k] <= tol else EXIT_TOLERANCE
        if code != EXIT_OK:
            msgs.append(f"tolerance violated: {values[k]:.3e} > {tol:.1e}")
        return RunResult(code, out, report, msgs)

    return _with_context(rs, "check-constraint", go)


def _xi_roots(spec: HamiltonianSpec) -> list[float]:
    A, B, C = spec.A, spec.B, spec.C
    if A == 0:
        return [C / (2 * B)] if B != 0 else []
    disc = B * B - A * C
    if disc < 0:
        return []
    r = math.sqrt(disc)
    return [(B - r) / A, (B + r) / A]
