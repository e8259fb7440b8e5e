"""Time integration of Hamilton's equations with invariant monitoring.

Two schemes are available:

``adaptive-embedded-rk``
    Dormand-Prince 5(4) with PI step-size control and the free quartic dense
    output of the pair, so samples can be recorded at fixed time intervals.

``symplectic-splitting``
    Strang splitting kick-drift-kick of the quadratic kinetic energy against
    the potential. ``symplectic_order=4`` composes three Strang steps
    (triple jump) for a fourth-order symplectic map.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .core import (
    ElrrSystem,
    HamiltonianSpec,
    PhaseState,
    canonical_rhs,
    elrr_rhs,
    hamiltonian,
    lrri,
    potential_gradient,
)
from .errors import DomainError, SingularityApproachError, StepBudgetError

ADAPTIVE = "adaptive-embedded-rk"
SYMPLECTIC = "symplectic-splitting"
METHODS = (ADAPTIVE, SYMPLECTIC)


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings.

    ``record_every`` is either an ``int`` (record every n accepted steps) or a
    ``float`` time interval. The initial and final states are always recorded.
    """

    method: str = ADAPTIVE
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    step: float = 1e-3
    max_steps: int = 10_000_000
    record_every: int | float = 1
    symplectic_order: int = 2

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not (isinstance(self.max_steps, int) and self.max_steps > 0):
            raise ValueError("max_steps must be a positive integer")
        if isinstance(self.record_every, bool) or not self.record_every > 0:
            raise ValueError("record_every must be a positive int or a positive time interval")
        if self.symplectic_order not in (2, 4):
            raise ValueError("symplectic_order must be 2 or 4")


@dataclass
class Trajectory:
    """Samples of a run: arrays of equal length, ``t`` strictly increasing.

    For non-Hamiltonian ELRR runs ``px, py`` hold velocities and ``H`` is NaN
    (``metadata["momenta"] == "velocities"``).
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    px: np.ndarray
    py: np.ndarray
    H: np.ndarray
    I: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)
    stats: dict[str, Any] = field(default_factory=dict)
    dense: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    COLUMNS = ("t", "x", "y", "px", "py", "H", "I")

    def __len__(self) -> int:
        return len(self.t)

    def state(self, i: int) -> PhaseState:
        return PhaseState(self.t[i], self.x[i], self.y[i], self.px[i], self.py[i])

    @property
    def final_state(self) -> PhaseState:
        return self.state(-1)

    def positions(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def sample(self, times) -> np.ndarray:
        """Rows ``(x, y, px, py)`` at arbitrary ``times`` inside the run (dense output)."""
        if self.dense is None:
            raise ValueError("this trajectory carries no dense output")
        return self.dense(np.asarray(times, dtype=float))


@dataclass(frozen=True)
class DriftReport:
    max_drift_H: float
    max_drift_I: float
    mean_drift_H: float
    mean_drift_I: float
    drift_H: np.ndarray = field(repr=False)
    drift_I: np.ndarray = field(repr=False)
    wall_time: float = 0.0
    step_stats: dict[str, Any] = field(default_factory=dict)


def relative_drift(series: np.ndarray) -> np.ndarray:
    series = np.asarray(series, dtype=float)
    if len(series) == 0:
        return series
    return np.abs(series - series[0]) / max(1.0, abs(series[0]))


def drift_report(traj: Trajectory) -> DriftReport:
    """Max/mean drift of H and I relative to their first sample, with
    denominator ``max(1, |initial value|)``. NaN series report NaN."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    dH, dI = relative_drift(traj.H), relative_drift(traj.I)
    return DriftReport(
        float(np.max(dH)), float(np.max(dI)), float(np.mean(dH)), float(np.mean(dI)),
        dH, dI, traj.stats.get("wall_time", 0.0),
        {k: v for k, v in traj.stats.items() if k != "wall_time"},
    )


# -- Dormand-Prince 5(4) ---------------------------------------------------------

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# b - b_hat over the seven stages (the last is the FSAL evaluation)
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# quartic continuous extension, y(t + th) = y + h * K^T P [th, th^2, th^3, th^4]
_P = np.array([
    [1.0, -2.8535800653862835, 3.0717434641059005, -1.1270175653862835],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 4.023133379230305, -6.249321565289, 2.675424484351598],
    [0.0, -3.7324019615885042, 10.068970589843675, -5.685526961588504],
    [0.0, 2.5548038301849423, -6.399112377351017, 3.5219323679207912],
    [0.0, -1.3744241142186024, 3.272657752246729, -1.7672812570757455],
    [0.0, 1.3824689317781436, -3.764937863556287, 2.382468931778144],
])

_SAFETY = 0.9
_BETA = 0.04
_ALPHA = 0.2 - 0.75 * _BETA
_FAC_MIN, _FAC_MAX = 0.2, 10.0


def _rms(v: np.ndarray) -> float:
    return float(np.sqrt(np.mean(v * v)))


def _initial_step(fun, t0, y0, f0, atol, rtol) -> float:
    scale = atol + rtol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = fun(t0 + h0, y0 + h0 * f0)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


@dataclass
class _DenseSegment:
    t0: float
    h: float
    y0: np.ndarray
    Q: np.ndarray  # K^T P, shape (n, 4)


def _dense_eval(segments: list[_DenseSegment], times: np.ndarray) -> np.ndarray:
    starts = np.array([seg.t0 for seg in segments])
    out = np.empty((len(times), len(segments[0].y0)))
    idx = np.clip(np.searchsorted(starts, times, side="right") - 1, 0, len(segments) - 1)
    for k, (i, tt) in enumerate(zip(idx, times)):
        seg = segments[i]
        th = (tt - seg.t0) / seg.h
        p = np.array([th, th * th, th**3, th**4])
        out[k] = seg.y0 + seg.h * (seg.Q @ p)
    return out


def dopri5(fun: Callable[[float, np.ndarray], np.ndarray], t0: float, y0, t_end: float, *,
           atol: float, rtol: float, max_steps: int, record_every: int | float = 1,
           keep_dense: bool = False):
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t_end > t0``.

    Returns ``(times, states, stats, dense)`` where ``dense`` maps an array of
    times to interpolated states (``None`` unless ``keep_dense``).

    A ``DomainError`` raised inside a stage rejects the step; if the step then
    collapses below ``1e-14 |t| + 1e-16`` a :class:`SingularityApproachError` is
    raised carrying the last accepted state.
    """
    if not t_end > t0:
        raise ValueError("t_end must exceed the initial time")
    y = np.array(y0, dtype=float)
    t = float(t0)
    f = fun(t, y)
    h = min(_initial_step(fun, t, y, f, atol, rtol), t_end - t)
    by_interval = not isinstance(record_every, int)
    if by_interval:
        n_rec = int(math.floor((t_end - t0) / record_every + 1e-9))
        record_times = [t0 + k * record_every for k in range(1, n_rec + 1)]
        if not record_times or t_end - record_times[-1] > 1e-12 * max(1.0, abs(t_end)):
            record_times.append(t_end)
        else:
            record_times[-1] = t_end
        next_rec = 0
    times, states = [t], [y.copy()]
    segments: list[_DenseSegment] = []
    K = np.empty((7, len(y)))
    err_prev = 1e-4
    rejected_last = False
    n_acc = n_rej = 0
    nfev = 2
    attempts = 0
    while t < t_end:
        attempts += 1
        if attempts > max_steps:
            raise StepBudgetError(f"max_steps={max_steps} exceeded at t={t!r}", (t, y.copy()))
        h_min = 1e-14 * abs(t) + 1e-16
        if h < h_min:
            raise SingularityApproachError(
                f"step size underflow (h={h:.3e}) at t={t!r}; likely approaching a singularity",
                (t, y.copy()),
            )
        last = t + h >= t_end
        if last:
            h = t_end - t
        K[0] = f
        try:
            for i in range(1, 6):
                K[i] = fun(t + _C[i] * h, y + h * (np.asarray(_A[i]) @ K[:i]))
            y_new = y + h * (_B @ K[:6])
            f_new = fun(t + h, y_new)
            K[6] = f_new
            nfev += 6
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = _rms(h * (K.T @ _E) / scale)
            if not math.isfinite(err):
                err = math.inf
        except DomainError:
            nfev += 6
            err = math.inf
        if err <= 1.0:
            if keep_dense or by_interval:
                seg = _DenseSegment(t, h, y.copy(), K.T @ _P)
                if keep_dense:
                    segments.append(seg)
            t_new = t_end if last else t + h
            if by_interval:
                while next_rec < len(record_times) and record_times[next_rec] <= t_new:
                    tr = record_times[next_rec]
                    if tr == t_new:
                        states.append(y_new.copy())
                    else:
                        states.append(_dense_eval([seg], np.array([tr]))[0])
                    times.append(tr)
                    next_rec += 1
            t, y, f = t_new, y_new, f_new
            n_acc += 1
            if not by_interval and (n_acc % record_every == 0 or t >= t_end):
                times.append(t)
                states.append(y.copy())
            fac = _SAFETY * err ** (-_ALPHA) * err_prev**_BETA if err > 0 else _FAC_MAX
            fac = min(_FAC_MAX, max(_FAC_MIN, fac))
            if rejected_last:
                fac = min(1.0, fac)
            h *= fac
            err_prev = max(err, 1e-4)
            rejected_last = False
        else:
            n_rej += 1
            fac = 0.5 if not math.isfinite(err) else max(_FAC_MIN, _SAFETY * err ** (-_ALPHA))
            h *= fac
            rejected_last = True
    stats = {"accepted_steps": n_acc, "rejected_steps": n_rej, "nfev": nfev}
    dense = None
    if keep_dense:
        segs = segments

        def dense(ts: np.ndarray) -> np.ndarray:
            return _dense_eval(segs, np.atleast_1d(ts))

    return np.array(times), np.array(states), stats, dense


# -- symplectic splitting -----------------------------------------------------

_CBRT2 = 2.0 ** (1.0 / 3.0)
_TRIPLE_JUMP = (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))


def symplectic_step(spec: HamiltonianSpec, state: PhaseState, h: float) -> PhaseState:
    """One Strang step: half kick, full drift by ``h K p``, half kick.

    Both kicks use the midpoint time ``t + h/2`` so the map stays second order
    and exactly reversible for time-dependent Lambda.
    """
    tm = state.t + 0.5 * h
    gx, gy = potential_gradient(spec, state.x, state.y, tm)
    px = state.px - 0.5 * h * gx
    py = state.py - 0.5 * h * gy
    x = state.x + h * (spec.A * px + spec.B * py)
    y = state.y + h * (spec.B * px + spec.C * py)
    gx, gy = potential_gradient(spec, x, y, tm)
    return PhaseState(state.t + h, x, y, px - 0.5 * h * gx, py - 0.5 * h * gy)


def _symplectic_map(spec: HamiltonianSpec, order: int) -> Callable[[PhaseState, float], PhaseState]:
    if order == 2:
        return lambda st, h: symplectic_step(spec, st, h)

    def composed(st: PhaseState, h: float) -> PhaseState:
        for w in _TRIPLE_JUMP:
            st = symplectic_step(spec, st, w * h)
        return st

    return composed


# -- public driver ------------------------------------------------------------


def _as_phase_state(last):
    if isinstance(last, tuple) and len(last) == 2:
        return PhaseState.from_array(last[1], last[0])
    return last


def _annotate(spec, times, states, metadata, stats, dense) -> Trajectory:
    H = np.empty(len(times))
    I = np.empty(len(times))
    for k, (tt, row) in enumerate(zip(times, states)):
        st = PhaseState(tt, *row)
        H[k] = hamiltonian(spec, st)
        I[k] = lrri(spec, st)
    return Trajectory(times, states[:, 0], states[:, 1], states[:, 2], states[:, 3], H, I,
                      metadata, stats, dense)


def integrate(spec: HamiltonianSpec, initial: PhaseState, t_end: float,
              cfg: IntegratorConfig | None = None, keep_dense: bool = False) -> Trajectory:
    """Integrate Hamilton's equations from ``initial`` to ``t_end``; every
    recorded sample is annotated with H and the invariant I."""
    cfg = cfg or IntegratorConfig()
    if not t_end > initial.t:
        raise ValueError("t_end must exceed initial.t")
    # fail early on states outside the potential's domain
    hamiltonian(spec, initial)
    meta = {
        "system": spec.name, "method": cfg.method, "abs_tol": cfg.abs_tol, "rel_tol": cfg.rel_tol,
        "step": cfg.step, "record_every": cfg.record_every, "momenta": "canonical",
    }
    if cfg.method == SYMPLECTIC:
        meta["symplectic_order"] = cfg.symplectic_order
    start = time.perf_counter()
    if cfg.method == ADAPTIVE:
        def fun(t, Y):
            return np.array(canonical_rhs(spec, PhaseState(t, *Y)))

        try:
            times, states, stats, dense = dopri5(
                fun, initial.t, initial.as_array(), t_end, atol=cfg.abs_tol, rtol=cfg.rel_tol,
                max_steps=cfg.max_steps, record_every=cfg.record_every, keep_dense=keep_dense,
            )
        except (SingularityApproachError, StepBudgetError) as exc:
            exc.last_state = _as_phase_state(exc.last_state)
            raise
    else:
        times, states, stats = _run_symplectic(spec, initial, t_end, cfg)
        dense = None
    stats["wall_time"] = time.perf_counter() - start
    return _annotate(spec, times, states, meta, stats, dense)


def _run_symplectic(spec, initial, t_end, cfg):
    span = t_end - initial.t
    n = max(1, math.ceil(span / cfg.step - 1e-9))
    if n > cfg.max_steps:
        raise StepBudgetError(f"{n} steps of size {cfg.step} exceed max_steps={cfg.max_steps}", initial)
    h = span / n
    if isinstance(cfg.record_every, int):
        every = cfg.record_every
    else:
        every = max(1, round(cfg.record_every / h))
    step = _symplectic_map(spec, cfg.symplectic_order)
    st = initial
    times, states = [st.t], [st.as_array()]
    for k in range(1, n + 1):
        st = step(st, h)
        if k % every == 0 or k == n:
            t_k = t_end if k == n else initial.t + k * h
            times.append(t_k)
            states.append(st.as_array())
    return np.array(times), np.array(states), {"accepted_steps": n, "rejected_steps": 0, "step": h}


def integrate_elrr(system: ElrrSystem, initial: PhaseState, t_end: float,
                   cfg: IntegratorConfig | None = None) -> Trajectory:
    """Adaptive integration of a non-Hamiltonian ELRR system.

    ``initial.px, initial.py`` are read as velocities. Only I is monitored.
    """
    cfg = cfg or IntegratorConfig()
    if cfg.method != ADAPTIVE:
        raise ValueError("non-Hamiltonian ELRR systems support only the adaptive integrator")

    def fun(t, Y):
        return np.array(elrr_rhs(system, t, *Y))

    start = time.perf_counter()
    times, states, stats, _ = dopri5(
        fun, initial.t, initial.as_array(), t_end, atol=cfg.abs_tol, rtol=cfg.rel_tol,
        max_steps=cfg.max_steps, record_every=cfg.record_every,
    )
    stats["wall_time"] = time.perf_counter() - start
    I = np.array([
        lrri(system, PhaseState(tt, *row), (row[2], row[3])) for tt, row in zip(times, states)
    ])
    meta = {"system": system.name, "method": cfg.method, "abs_tol": cfg.abs_tol,
            "rel_tol": cfg.rel_tol, "record_every": cfg.record_every, "momenta": "velocities"}
    return Trajectory(times, states[:, 0], states[:, 1], states[:, 2], states[:, 3],
                      np.full(len(times), np.nan), I, meta, stats)
