"""Reduction of an autonomous spec to two separable first-order equations.

With ``q = A y^2 - 2Bxy + C x^2``, ``s = y/x`` and the rescaled time
``d tau = dt/q``::

    (dq/dtau)^2 = 4 rho q^2 (2 q H - q Lambda(q) - 2 I)
    (ds/dtau)^2 = 2 xi(s)^2 (I - F_integral(s))

Each equation is solved as ``(dz/dtau)^2 = R(z)``. Turning points (simple
roots of R) are bracketed by an outward scan from the initial value and
refined by bisection. The flow is then carried through them without
restarting, using an angle variable:

* two turning points ``lo < hi``: ``z = m - a cos(psi)``, ``dpsi/dtau =
  sqrt(R / ((z - lo)(hi - z)))``, turning points at ``psi = k pi``;
* one turning point ``z_t``: ``z = z_t +/- w^2``, ``dw/dtau = sqrt(R/|z - z_t|)/2``;
* none: ``dz/dtau = +/- sqrt(R)``.

The s-equation is integrated in ``phi = atan(s)`` (lifted to the real line),
where it reads ``(dphi/dtau)^2 = 2 eta(phi)^2 (I - F_integral(tan(phi)))`` with
``eta = A sin^2 - 2B sin cos + C cos^2``. This keeps orbits that pass
through ``x = 0`` regular when F_integral allows it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import brentq

from .core import HamiltonianSpec, PhaseState, hamiltonian, lrri, momenta, q_value, xi
from .errors import (
    ChartError,
    DomainError,
    ForbiddenRegionError,
    NotIntegrableError,
    NumericalRootError,
    ReconstructionDomainError,
    RescalingDomainError,
    SingularDirectionError,
)
from .expression import BinOp, Num, Var
from .functions import RealFunction

ODE_RTOL = 1e-12
ODE_ATOL = 1e-13
Q_SCAN_FACTOR = 1.0 + 1.0 / 128.0
Q_SCAN_RANGE = 1e12
PHI_SCAN_STEP = math.pi / 2000.0
ENDPOINT_FRACTION = 1e-5


def _sign(v: float) -> int:
    return -1 if v < 0 else 1


# -- (q, s) states --------------------------------------------------------------


@dataclass(frozen=True)
class QsState:
    """A point in ``(q, s, p_q, p_s)`` with the branch bits needed to invert it.

    ``x = sign_x * sqrt(q / xi(s))``; ``sign_dq`` and ``sign_ds`` are the
    current directions of motion of q and s in rescaled time.
    """

    q: float
    s: float
    p_q: float
    p_s: float
    sign_x: int = 1
    sign_dq: int = 1
    sign_ds: int = 1
    t: float = 0.0
    tau: float = 0.0


def to_qs(spec: HamiltonianSpec, state: PhaseState, tau: float = 0.0) -> QsState:
    x, y, px, py = state.x, state.y, state.px, state.py
    if x == 0.0:
        raise ChartError("x = 0: s = y/x is undefined on this chart")
    A, B, C = spec.A, spec.B, spec.C
    q = q_value(spec, x, y)
    if q == 0.0:
        raise ChartError("q = 0: the (q, s) map is singular")
    p_q = (x * px + y * py) / (2.0 * q)
    p_s = x * x * ((B * x - A * y) * px + (C * x - B * y) * py) / q
    return QsState(q, y / x, p_q, p_s, _sign(x), _sign(spec.rho * p_q), _sign(p_s), state.t, tau)


def from_qs(spec: HamiltonianSpec, qs: QsState) -> PhaseState:
    A, B, C = spec.A, spec.B, spec.C
    z = xi(spec, qs.s)
    if z == 0.0:
        raise SingularDirectionError(f"xi(s) = 0 at s = {qs.s!r}", qs.s)
    ratio = qs.q / z
    if not ratio > 0:
        raise ReconstructionDomainError(f"q/xi(s) = {ratio!r} is not positive")
    x = qs.sign_x * math.sqrt(ratio)
    y = qs.s * x
    px = qs.p_q * 2.0 * (C * x - B * y) - qs.p_s * y / (x * x)
    py = qs.p_q * 2.0 * (A * y - B * x) + qs.p_s / x
    return PhaseState(qs.t, x, y, px, py)


def lrri_qs(spec: HamiltonianSpec, qs: QsState) -> float:
    """``I = xi(s)^2 p_s^2 / 2 + F_integral(s)``."""
    ang = xi(spec, qs.s) * qs.p_s
    out = 0.5 * ang * ang
    return out + spec.F_integral(qs.s) if spec.has_angular_part else out


def hamiltonian_qs(spec: HamiltonianSpec, qs: QsState) -> float:
    """``H = 2 rho q p_q^2 + Lambda(q,t)/2 + I/q``."""
    q = qs.q
    return 2.0 * spec.rho * q * qs.p_q**2 + 0.5 * spec.Lambda(q, qs.t) + lrri_qs(spec, qs) / q


# -- time rescaling -------------------------------------------------------------


@dataclass(frozen=True)
class TimeMap:
    """Monotone map between original time t and rescaled time tau."""

    t: np.ndarray
    tau: np.ndarray
    _forward: Callable = field(repr=False)
    _inverse: Callable = field(repr=False)

    def tau_of(self, t):
        return self._forward(t)

    def t_of(self, tau):
        return self._inverse(tau)


def rescale_time(t, q) -> TimeMap:
    """``tau(t) = integral of dt/q`` from the first sample.

    The integrand is a cubic spline through the samples, integrated exactly;
    the inverse is a monotone (PCHIP) interpolant.
    """
    t = np.asarray(t, dtype=float)
    q = np.asarray(q, dtype=float)
    if t.ndim != 1 or t.shape != q.shape or t.size < 2:
        raise ValueError("t and q must be 1-d arrays of equal length >= 2")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t must be strictly increasing")
    if not (np.all(q > 0) or np.all(q < 0)):
        raise RescalingDomainError("q touches zero or changes sign over the samples")
    if np.any(q < 0):
        raise RescalingDomainError("the rescaling is only applied for positive q")
    if t.size < 4:
        tau = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (1 / q[1:] + 1 / q[:-1]))])
        forward = lambda tt: np.interp(tt, t, tau)
    else:
        anti = CubicSpline(t, 1.0 / q).antiderivative()
        tau = anti(t) - anti(t[0])
        forward = lambda tt: anti(tt) - anti(t[0])
    if np.any(np.diff(tau) <= 0):
        raise RescalingDomainError("tau(t) is not strictly increasing")
    return TimeMap(t, tau, forward, PchipInterpolator(tau, t))


# -- separable equations --------------------------------------------------------


def q_rhs(spec: HamiltonianSpec, H: float, I: float) -> Callable[[float], float]:
    rho = spec.rho

    def R(q: float) -> float:
        return 4.0 * rho * q * q * (2.0 * q * H - q * spec.Lambda(q, 0.0) - 2.0 * I)

    return R


def _eta(spec: HamiltonianSpec, phi: float) -> float:
    c, s = math.cos(phi), math.sin(phi)
    return spec.A * s * s - 2.0 * spec.B * s * c + spec.C * c * c


def _deta(spec: HamiltonianSpec, phi: float) -> float:
    return (spec.A - spec.C) * math.sin(2.0 * phi) - 2.0 * spec.B * math.cos(2.0 * phi)


def phi_rhs(spec: HamiltonianSpec, I: float) -> Callable[[float], float]:
    angular = spec.has_angular_part

    def R(phi: float) -> float:
        e = _eta(spec, phi)
        gap = I - spec.F_integral(math.tan(phi)) if angular else I
        return 2.0 * e * e * gap

    return R


def s_rhs(spec: HamiltonianSpec, I: float) -> Callable[[float], float]:
    angular = spec.has_angular_part

    def R(s: float) -> float:
        z = xi(spec, s)
        return 2.0 * z * z * (I - spec.F_integral(s) if angular else I)

    return R


def _allowed(R: Callable[[float], float], z: float) -> bool:
    try:
        v = R(z)
    except (DomainError, ZeroDivisionError, OverflowError, ValueError):
        return False
    return math.isfinite(v) and v >= 0.0


def _bisect(R, ok: float, bad: float) -> float:
    """Boundary of the allowed set between ``ok`` (R >= 0) and ``bad``."""
    for _ in range(200):
        mid = 0.5 * (ok + bad)
        if mid == ok or mid == bad:
            break
        if _allowed(R, mid):
            ok = mid
        else:
            bad = mid
    return ok


@dataclass
class TurningPoint:
    variable: str
    tau: float
    t: float
    value: float
    rhs: float


class _Motion:
    """Angle-variable representation of one separable degree of freedom."""

    kind = "monotone"

    def __init__(self, R: Callable[[float], float]):
        self.R = R

    def turning_crossings(self, u_start: float, u_end: float) -> list[float]:
        return []


class _Libration(_Motion):
    kind = "libration"

    def __init__(self, R, lo: float, hi: float, z0: float, sign0: int):
        super().__init__(R)
        self.lo, self.hi = lo, hi
        self.m, self.a = 0.5 * (lo + hi), 0.5 * (hi - lo)
        self.delta = ENDPOINT_FRACTION * self.a
        d = self.delta
        self._lo_nodes = (self._Q(lo + d), self._Q(lo + 2 * d))
        self._hi_nodes = (self._Q(hi - d), self._Q(hi - 2 * d))
        c = min(1.0, max(-1.0, (self.m - z0) / self.a))
        self.psi0 = math.acos(c) if sign0 >= 0 else -math.acos(c)

    def _Q(self, z: float) -> float:
        return self.R(z) / ((z - self.lo) * (self.hi - z))

    def Q(self, z: float) -> float:
        d = self.delta
        if z - self.lo < d:
            q1, q2 = self._lo_nodes
            return q1 + (q1 - q2) * (d - (z - self.lo)) / d
        if self.hi - z < d:
            q1, q2 = self._hi_nodes
            return q1 + (q1 - q2) * (d - (self.hi - z)) / d
        return self._Q(z)

    def y0(self) -> float:
        return self.psi0

    def value(self, psi: float) -> float:
        return self.m - self.a * math.cos(psi)

    def rate(self, psi: float) -> float:
        return math.sqrt(max(self.Q(self.value(psi)), 0.0))

    def dvalue(self, psi: float) -> float:
        return self.a * math.sin(psi) * self.rate(psi)

    def turning_crossings(self, u0: float, u1: float) -> list[float]:
        k0, k1 = math.floor(u0 / math.pi) + 1, math.floor(u1 / math.pi)
        return [k * math.pi for k in range(k0, k1 + 1)]


class _Escape(_Motion):
    """One turning point ``zt``; ``z = zt + side * w^2``."""

    kind = "escape"

    def __init__(self, R, zt: float, side: int, z0: float, sign0: int):
        super().__init__(R)
        self.zt, self.side = zt, side
        self.delta = ENDPOINT_FRACTION * max(abs(z0 - zt), 1e-8 * max(1.0, abs(zt)))
        d = self.delta
        self._nodes = (self._Q(zt + side * d), self._Q(zt + 2 * side * d))
        self.w0 = side * sign0 * math.sqrt(abs(z0 - zt))

    def _Q(self, z: float) -> float:
        return self.R(z) / abs(z - self.zt)

    def Q(self, z: float) -> float:
        dist = abs(z - self.zt)
        if dist < self.delta:
            q1, q2 = self._nodes
            return q1 + (q1 - q2) * (self.delta - dist) / self.delta
        return self._Q(z)

    def y0(self) -> float:
        return self.w0

    def value(self, w: float) -> float:
        return self.zt + self.side * w * w

    def rate(self, w: float) -> float:
        return 0.5 * math.sqrt(max(self.Q(self.value(w)), 0.0))

    def dvalue(self, w: float) -> float:
        return 2.0 * self.side * w * self.rate(w)

    def turning_crossings(self, u0: float, u1: float) -> list[float]:
        return [0.0] if u0 < 0.0 <= u1 else []


class _Monotone(_Motion):
    def __init__(self, R, z0: float, sign0: int):
        super().__init__(R)
        self.z0, self.sign = z0, sign0

    def y0(self) -> float:
        return self.z0

    def value(self, z: float) -> float:
        return z

    def rate(self, z: float) -> float:
        return self.sign * math.sqrt(max(self.R(z), 0.0))

    def dvalue(self, z: float) -> float:
        return self.rate(z)


class _Constant(_Motion):
    kind = "constant"

    def __init__(self, R, z0: float):
        super().__init__(R)
        self.z0 = z0

    def y0(self) -> float:
        return self.z0

    def value(self, z: float) -> float:
        return z

    def rate(self, z: float) -> float:
        return 0.0

    def dvalue(self, z: float) -> float:
        return 0.0


def _check_start(R, z0: float, scale: float, what: str) -> float:
    try:
        r0 = R(z0)
    except DomainError as exc:
        raise ForbiddenRegionError(f"{what}: right-hand side undefined at the initial value") from exc
    if r0 < -1e-10 * scale:
        raise ForbiddenRegionError(f"{what}: right-hand side {r0!r} < 0 at the initial value")
    return r0


def _scan(R, z0: float, step: Callable[[float], float], limit: Callable[[float], bool],
          guard: Callable[[float, float], None] | None = None) -> tuple[float, float] | None:
    """Walk outward until R turns negative; return an (ok, bad) bracket or None."""
    prev = z0
    while True:
        nxt = step(prev)
        if limit(nxt):
            return None
        if guard is not None:
            guard(prev, nxt)
        if not _allowed(R, nxt):
            return prev, nxt
        prev = nxt


def _classify(R, z0: float, sign0: int, brackets: tuple, tiny: float) -> _Motion:
    lo_b, hi_b = brackets
    lo = _bisect(R, *lo_b) if lo_b else None
    hi = _bisect(R, *hi_b) if hi_b else None
    if lo is not None and hi is not None:
        if hi - lo <= tiny:
            return _Constant(R, z0)
        return _Libration(R, lo, hi, min(max(z0, lo), hi), sign0)
    if lo is not None:
        return _Escape(R, lo, 1, max(z0, lo), sign0)
    if hi is not None:
        return _Escape(R, hi, -1, min(z0, hi), sign0)
    return _Monotone(R, z0, sign0)


def _q_motion(spec: HamiltonianSpec, H: float, I: float, q0: float, sign0: int) -> _Motion:
    if not q0 > 0:
        raise RescalingDomainError(f"q0 = {q0!r}: the rescaled-time reduction needs q > 0")
    R = q_rhs(spec, H, I)
    scale = 4.0 * abs(spec.rho) * q0 * q0 * (abs(2 * q0 * H) + abs(q0 * spec.Lambda(q0, 0.0)) + 2 * abs(I))
    _check_start(R, q0, scale, "q-equation")
    if R(q0) <= 0.0:
        # starting on a turning point: probe which side is allowed
        h = 1e-9 * q0
        up, down = _allowed(R, q0 + h) and R(q0 + h) > 0, _allowed(R, q0 - h) and R(q0 - h) > 0
        if not (up or down):
            return _Constant(R, q0)
        sign0 = 1 if up else -1
    hi_b = _scan(R, q0, lambda z: z * Q_SCAN_FACTOR, lambda z: z > Q_SCAN_RANGE * q0)
    lo_b = _scan(R, q0, lambda z: z / Q_SCAN_FACTOR, lambda z: z < q0 / Q_SCAN_RANGE)
    if lo_b is None:
        raise RescalingDomainError("q can reach zero: no lower turning point above 0")
    return _classify(R, q0, sign0, (lo_b, hi_b), 1e-13 * q0)


def _phi_motion(spec: HamiltonianSpec, I: float, phi0: float, sign0: int) -> _Motion:
    R = phi_rhs(spec, I)
    if _eta(spec, phi0) == 0.0:
        raise SingularDirectionError("xi(s) = 0 at the initial direction", math.tan(phi0))
    scale = 2.0 * _eta(spec, phi0) ** 2 * (abs(I) + 1.0)
    _check_start(R, phi0, scale, "s-equation")

    def guard(a: float, b: float) -> None:
        if spec.x_sign is not None and math.cos(b) <= 0.0:
            raise ChartError(f"the s-motion reaches x = 0, leaving the half-plane sign(x) = {spec.x_sign}")
        ea, eb = _eta(spec, a), _eta(spec, b)
        if ea == 0.0 or eb == 0.0 or (ea > 0) != (eb > 0):
            root = brentq(lambda p: _eta(spec, p), a, b, xtol=1e-15) if ea * eb < 0 else (a if ea == 0 else b)
            raise SingularDirectionError(f"xi(s) = 0 reached at s = {math.tan(root)!r}", math.tan(root))

    if R(phi0) <= 0.0:
        h = 1e-9
        up, down = _allowed(R, phi0 + h) and R(phi0 + h) > 0, _allowed(R, phi0 - h) and R(phi0 - h) > 0
        if not (up or down):
            return _Constant(R, phi0)
        sign0 = 1 if up else -1
    hi_b = _scan(R, phi0, lambda p: p + PHI_SCAN_STEP, lambda p: p > phi0 + math.pi, guard)
    lo_b = _scan(R, phi0, lambda p: p - PHI_SCAN_STEP, lambda p: p < phi0 - math.pi, guard)
    if (lo_b is None) != (hi_b is None):
        raise NumericalRootError("inconsistent turning-point scan for the s-equation")
    return _classify(R, phi0, sign0, (lo_b, hi_b), 1e-14)


@dataclass
class SeparableSolution:
    """Sampled solution of one separable equation on a uniform tau grid."""

    variable: str
    kind: str
    tau: np.ndarray
    values: np.ndarray
    rates: np.ndarray
    turning_points: list[TurningPoint]
    t: np.ndarray | None = None
    bounds: tuple[float | None, float | None] = (None, None)
    _dense: Any = field(default=None, repr=False)
    _motion: Any = field(default=None, repr=False)

    def __call__(self, tau):
        """Value at arbitrary rescaled times inside the solved range."""
        u = np.atleast_2d(self._dense(np.asarray(tau, dtype=float)))[0]
        return np.array([self._motion.value(v) for v in np.atleast_1d(u)])

    def rate_at(self, tau):
        u = np.atleast_2d(self._dense(np.asarray(tau, dtype=float)))[0]
        return np.array([self._motion.dvalue(v) for v in np.atleast_1d(u)])


def _integrate(motion: _Motion, variable: str, tau_end: float | None, num: int,
               time_weight: Callable[[float], float] | None = None, t0: float = 0.0,
               t_end: float | None = None, to_value: Callable[[float], float] = lambda z: z,
               rhs_of: Callable[[float], float] | None = None) -> SeparableSolution:
    with_t = time_weight is not None

    def fun(tau, Y):
        u = Y[0]
        d = [motion.rate(u)]
        if with_t:
            d.append(time_weight(motion.value(u)))
        return d

    y0 = [motion.y0()] + ([t0] if with_t else [])
    events = None
    span_end = tau_end
    if t_end is not None:
        ev = lambda tau, Y: Y[1] - t_end
        ev.terminal, ev.direction = True, 1
        events = [ev]
        if span_end is None:
            span_end = 1e9
    if isinstance(motion, _Constant):
        span_end = span_end if tau_end is not None else (t_end - t0) / time_weight(motion.z0)
    sol = solve_ivp(fun, (0.0, span_end), y0, method="DOP853", rtol=ODE_RTOL, atol=ODE_ATOL,
                    dense_output=True, events=events)
    if sol.status < 0:
        raise NumericalRootError(f"{variable}-equation integration failed: {sol.message}")
    tau_final = sol.t[-1]
    if t_end is not None and sol.status != 1 and not isinstance(motion, _Constant):
        raise NumericalRootError(f"{variable}-equation did not reach t_end")
    grid = np.linspace(0.0, tau_final, num)
    U = sol.sol(grid)
    vals = np.array([to_value(motion.value(u)) for u in U[0]])
    rates = np.array([motion.dvalue(u) for u in U[0]])
    tps = []
    R = rhs_of or motion.R
    for u_k in motion.turning_crossings(min(U[0][0], U[0][-1]), max(U[0][0], U[0][-1])):
        tk = brentq(lambda tt: sol.sol(tt)[0] - u_k, 0.0, tau_final, xtol=1e-14)
        zk = motion.value(u_k)
        tps.append(TurningPoint(variable, tk, float(sol.sol(tk)[1]) if with_t else math.nan,
                                to_value(zk), R(zk)))
    bounds = (getattr(motion, "lo", None), getattr(motion, "hi", None))
    if isinstance(motion, _Escape):
        bounds = (motion.zt, None) if motion.side > 0 else (None, motion.zt)
    return SeparableSolution(variable, motion.kind, grid, vals, rates, tps,
                             U[1] if with_t else None, bounds, sol.sol, motion)


def solve_separable_q(spec: HamiltonianSpec, H: float, I: float, q0: float, sign0: int,
                      tau_end: float, num: int = 1001) -> SeparableSolution:
    """Solve ``(dq/dtau)^2 = 4 rho q^2 (2qH - q Lambda(q) - 2I)`` from ``q0``.

    ``sign0`` is the initial sign of dq/dtau. The returned ``t`` array holds
    ``integral q dtau`` (original time elapsed).
    """
    if spec.lambda_time_dependent:
        raise NotIntegrableError("Lambda depends on t: the q-equation is not autonomous")
    motion = _q_motion(spec, H, I, q0, sign0)
    return _integrate(motion, "q", tau_end, num, time_weight=lambda q: q)


def solve_separable_s(spec: HamiltonianSpec, I: float, s0: float, sign0: int, tau_end: float,
                      num: int = 1001) -> SeparableSolution:
    """Solve ``(ds/dtau)^2 = 2 xi(s)^2 (I - F_integral(s))`` from ``s0``.

    ``sign0`` is the initial sign of ds/dtau. Values are ``tan(phi)`` of the
    lifted angle; ``rates`` are ``dphi/dtau``.
    """
    phi0 = math.atan(s0)
    motion = _phi_motion(spec, I, phi0, sign0)
    sol = _integrate(motion, "s", tau_end, num, to_value=math.tan)
    sol.phi = np.array([motion.value(u) for u in sol._dense(sol.tau)[0]])
    return sol


# -- full pipeline --------------------------------------------------------------


@dataclass
class QuadratureSolution:
    tau: np.ndarray
    t: np.ndarray
    q: np.ndarray
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    px: np.ndarray
    py: np.ndarray
    H: float
    I: float
    events: list[TurningPoint]
    metadata: dict[str, Any]
    q_solution: SeparableSolution = field(repr=False)
    s_solution: SeparableSolution = field(repr=False)
    spec: HamiltonianSpec = field(repr=False)

    def tau_of_t(self, t) -> np.ndarray:
        qd = self.q_solution._dense
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(tt)
        t0, t1, tau1 = self.t[0], self.t[-1], self.tau[-1]
        for i, v in enumerate(tt):
            if not t0 - 1e-12 <= v <= t1 + 1e-12:
                raise ValueError(f"t = {v!r} outside the solved range [{t0}, {t1}]")
            if v <= t0:
                out[i] = 0.0
            elif v >= t1:
                out[i] = tau1
            else:
                out[i] = brentq(lambda s: qd(s)[1] - v, 0.0, tau1, xtol=1e-15, rtol=1e-15)
        return out

    def states_at(self, t) -> np.ndarray:
        """Cartesian ``(x, y, px, py)`` rows at original times ``t``."""
        tau = self.tau_of_t(t)
        return np.array([_reconstruct(self.spec, self.q_solution, self.s_solution,
                                      self.metadata["sign_x"], tt) for tt in tau])

    def qs_state(self, i: int) -> QsState:
        st = PhaseState(self.t[i], self.x[i], self.y[i], self.px[i], self.py[i])
        return replace(to_qs(self.spec, st, self.tau[i]))

    def residuals(self) -> tuple[float, float]:
        """Sup-norm residuals of the squared equations on the sample grid.

        The s residual is taken in the angle form ``(dphi/dtau)^2 - R_phi``,
        which equals the s form times ``cos(phi)^4``.
        """
        Rq = q_rhs(self.spec, self.H, self.I)
        Rp = phi_rhs(self.spec, self.I)
        rq = max(abs(d * d - Rq(q)) for d, q in zip(self.q_solution.rates, self.q))
        rs = max(abs(d * d - Rp(p)) for d, p in zip(self.s_solution.rates, self.s_solution.phi))
        return rq, rs


def _reconstruct(spec, qsol: SeparableSolution, ssol: SeparableSolution, sign_x: int,
                 tau: float) -> tuple[float, float, float, float]:
    q = float(qsol(tau)[0])
    dq = float(qsol.rate_at(tau)[0])
    u = ssol._dense(tau)[0]
    phi = ssol._motion.value(u)
    dphi = ssol._motion.dvalue(u)
    e = _eta(spec, phi)
    if not q / e > 0:
        raise ReconstructionDomainError(f"q/xi(s) = {q / e!r} is not positive")
    rad = math.sqrt(q / e)
    c, s = math.cos(phi), math.sin(phi)
    drad = 0.5 / rad * (dq / e - q * _deta(spec, phi) * dphi / (e * e))
    x, y = sign_x * c * rad, sign_x * s * rad
    vx = sign_x * (-s * dphi * rad + c * drad) / q
    vy = sign_x * (c * dphi * rad + s * drad) / q
    px, py = momenta(spec, vx, vy)
    return x, y, px, py


def quadrature_pipeline(spec: HamiltonianSpec, initial: PhaseState, t_end: float,
                        num: int = 1001) -> QuadratureSolution:
    """Solve an autonomous spec from ``initial`` to ``t_end`` by quadratures.

    H and I are fixed from the initial state; the q-equation is solved in tau
    together with ``dt/dtau = q`` until ``t = t_end``; the s-equation is then
    solved over the same tau range and the Cartesian orbit is rebuilt.
    """
    if spec.lambda_time_dependent:
        raise NotIntegrableError("Lambda depends on t: the quadrature pipeline needs an autonomous spec")
    if not t_end > initial.t:
        raise ValueError("t_end must exceed the initial time")
    H, I = hamiltonian(spec, initial), lrri(spec, initial)
    q0 = q_value(spec, initial.x, initial.y)
    if not q0 > 0:
        raise RescalingDomainError(f"q0 = {q0!r}: the pipeline needs q > 0")
    qs0 = to_qs(spec, initial)
    qmotion = _q_motion(spec, H, I, q0, qs0.sign_dq)
    qsol = _integrate(qmotion, "q", None, num, time_weight=lambda q: q, t0=initial.t, t_end=t_end)
    tau_end = qsol.tau[-1]
    ssol = solve_separable_s(spec, I, qs0.s, qs0.sign_ds, tau_end, num)
    for tp in ssol.turning_points:
        tp.t = float(qsol._dense(tp.tau)[1])
    rows = np.array([_reconstruct(spec, qsol, ssol, qs0.sign_x, tt) for tt in qsol.tau])
    events = sorted(qsol.turning_points + ssol.turning_points, key=lambda e: e.tau)
    meta = {"sign_x": qs0.sign_x, "q_kind": qsol.kind, "s_kind": ssol.kind,
            "q_bounds": qsol.bounds, "phi_bounds": ssol.bounds,
            "initial_sign_dq": qs0.sign_dq, "initial_sign_ds": qs0.sign_ds}
    return QuadratureSolution(qsol.tau, qsol.t, qsol.values, ssol.values, rows[:, 0], rows[:, 1],
                              rows[:, 2], rows[:, 3], H, I, events, meta, qsol, ssol, spec)


# -- Lambda shift ---------------------------------------------------------------


def shift_lambda(spec: HamiltonianSpec, k2: float) -> HamiltonianSpec:
    """``Lambda(q,t) -> Lambda(q,t) + 2 k2/q``.

    In the q-equation this is the same as replacing I by ``I + k2``; the
    s-equation is unchanged. ``k2 = 0`` returns ``spec`` itself.
    """
    if k2 == 0:
        return spec
    lam = spec.Lambda
    if lam.expression is not None:
        expr = BinOp("+", lam.expression, BinOp("/", Num(2.0 * k2), Var("q")))
        new = RealFunction.from_expression(expr, lam.args)
    else:
        new = RealFunction(lambda q, t=0.0: lam(q, t) + 2.0 * k2 / q,
                           lambda q, t=0.0: lam.derivative(q, t) - 2.0 * k2 / (q * q),
                           f"{lam.label} + {2.0 * k2!r}/q", args=lam.args)
    meta = {**spec.metadata, "Lambda": new.label, "lambda_shift": k2}
    return replace(spec, Lambda=new, metadata=meta)
