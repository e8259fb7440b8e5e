"""Hamiltonian Ermakov systems: domain types and pointwise operations.

Conventions
-----------
* ``s = y/x`` is the ratio variable and ``q = A y^2 - 2 B x y + C x^2`` the
  quadratic kinetic variable, so that ``q = x^2 xi(s)`` with
  ``xi(s) = A s^2 - 2 B s + C``.
* The potential is ``V = Lambda(q, t)/2 + F_integral(s)/q``.
* ``F_integral`` is an antiderivative of ``F``. Specs built from an ``F``
  expression integrate it numerically from ``lower_limit`` (default 1); specs
  built from a closed antiderivative carry ``lower_limit=None``. The choice
  shifts ``I`` and ``V`` by constants only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .errors import ChartError, SingularDirectionError, SingularPointError
from .expression import ZERO, Expression
from .functions import RealFunction, central_difference, numerical_antiderivative

DEFAULT_LOWER_LIMIT = 1.0


# -- domain types -------------------------------------------------------------


@dataclass(frozen=True)
class PhaseState:
    """Cartesian phase point. ``px, py`` are canonical momenta (or velocities
    for non-Hamiltonian ELRR runs)."""

    t: float
    x: float
    y: float
    px: float
    py: float

    def __post_init__(self):
        for name in ("t", "x", "y", "px", "py"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"PhaseState.{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, arr, t: float = 0.0) -> "PhaseState":
        x, y, px, py = (float(v) for v in arr)
        return cls(t, x, y, px, py)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.px, self.py])


@dataclass(frozen=True)
class GenericElrrSystem:
    """``x'' + w^2 x = f(y/x)/(y x^2)``, ``y'' + w^2 y = g(x/y)/(x y^2)``."""

    f: Callable[[float], float]
    g: Callable[[float], float]
    omega2: Callable[[float, float, float], float]
    name: str = "generic"


@dataclass(frozen=True)
class ElrrSystem:
    """Reduced form ``x'' + Omega^2 x = F(y/x)/(y x^2)``, ``y'' + Omega^2 y = 0``."""

    F: Callable[[float], float]
    F_integral: Callable[[float], float]
    Omega2: Callable[[float, float, float], float]
    lower_limit: float | None = DEFAULT_LOWER_LIMIT
    name: str = "elrr"


@dataclass(frozen=True)
class HamiltonianSpec:
    """``H = A px^2/2 + B px py + C py^2/2 + Lambda(q,t)/2 + F_integral(s)/q``.

    ``Lambda`` is a function of ``(q, t)`` whose derivative is taken in ``q``.
    ``F_integral.derivative`` must be ``F`` and ``F.derivative`` is ``F'``.
    ``s_band`` optionally records the interval of ``s`` on which the catalog
    entry is regular (collinear singular directions are chart boundaries).
    ``x_sign`` restricts the potential to the half-plane ``sign(x) = x_sign``
    for entries whose ratio form only holds there (it raises a chart error
    elsewhere instead of silently describing another system).
    """

    A: float
    B: float
    C: float
    Lambda: RealFunction
    F_integral: RealFunction
    F: RealFunction
    lambda_time_dependent: bool = False
    lower_limit: float | None = DEFAULT_LOWER_LIMIT
    name: str = "custom"
    s_band: tuple[float, float] | None = None
    x_sign: int | None = None
    metadata: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("A", "B", "C"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be a finite real number")
            object.__setattr__(self, name, v)
        if self.x_sign not in (None, 1, -1):
            raise ValueError("x_sign must be None, +1 or -1")
        if self.A * self.C - self.B**2 == 0.0:
            raise ValueError(
                f"degenerate kinetic form: AC - B^2 = 0 for (A, B, C) = ({self.A}, {self.B}, {self.C})"
            )

    @property
    def rho(self) -> float:
        return self.A * self.C - self.B**2

    @property
    def has_angular_part(self) -> bool:
        """False when F_integral is the literal constant 0 (V then depends on q only)."""
        return not (self.F_integral.expression is not None and self.F_integral.expression == ZERO)

    @property
    def analytic(self) -> bool:
        return self.Lambda.analytic and self.F_integral.analytic and self.F.analytic

    @classmethod
    def from_expressions(
        cls,
        A: float,
        B: float,
        C: float,
        Lambda: "str | float | Expression" = "q",
        F_integral: "str | float | Expression | None" = None,
        F: "str | float | Expression | None" = None,
        *,
        lower_limit: float = DEFAULT_LOWER_LIMIT,
        name: str = "custom",
        s_band: tuple[float, float] | None = None,
        x_sign: int | None = None,
        metadata: Mapping[str, Any] | None = None,
    ) -> "HamiltonianSpec":
        """Build a spec from formula strings.

        Give either ``F_integral`` (a closed antiderivative, differentiated
        symbolically to get F) or ``F`` (integrated numerically from
        ``lower_limit``). Neither means F = 0.
        """
        if F_integral is not None and F is not None:
            raise ValueError("give either F_integral or F, not both")
        lam = RealFunction.from_expression(Lambda, ("q", "t"))
        meta = dict(metadata or {})
        if F_integral is not None:
            Fi = RealFunction.from_expression(F_integral, ("s",))
            Ff = Fi.derivative_function()
            limit = None
        elif F is not None:
            Ff = RealFunction.from_expression(F, ("s",))
            Fi = RealFunction(numerical_antiderivative(Ff.func, lower_limit), Ff.func, f"int({Ff.label})")
            limit = lower_limit
        else:
            Fi = RealFunction.constant(0.0)
            Ff = RealFunction.constant(0.0)
            limit = None
        meta.setdefault("Lambda", lam.label)
        meta.setdefault("F_integral", Fi.label)
        return cls(
            A, B, C, lam, Fi, Ff,
            lambda_time_dependent="t" in (lam.expression.variables if lam.expression else ()),
            lower_limit=limit, name=name, s_band=s_band, x_sign=x_sign, metadata=meta,
        )


# -- elementary quantities ----------------------------------------------------


def rho(spec: HamiltonianSpec) -> float:
    """Determinant ``AC - B^2`` of the kinetic form."""
    return spec.A * spec.C - spec.B**2


def xi(spec: HamiltonianSpec, s: float) -> float:
    return spec.A * s * s - 2.0 * spec.B * s + spec.C


def q_value(spec: HamiltonianSpec, x: float, y: float) -> float:
    return spec.A * y * y - 2.0 * spec.B * x * y + spec.C * x * x


def kinetic_matrix(spec: HamiltonianSpec) -> np.ndarray:
    return np.array([[spec.A, spec.B], [spec.B, spec.C]])


def velocities(spec: HamiltonianSpec, px: float, py: float) -> tuple[float, float]:
    return spec.A * px + spec.B * py, spec.B * px + spec.C * py


_kinetic_velocities = velocities


def momenta(spec: HamiltonianSpec, vx: float, vy: float) -> tuple[float, float]:
    """Inverse of :func:`velocities`."""
    r = rho(spec)
    return (spec.C * vx - spec.B * vy) / r, (spec.A * vy - spec.B * vx) / r


# -- potential and its gradient ----------------------------------------------


def _chart(spec: HamiltonianSpec, x: float, y: float) -> tuple[float, float | None]:
    q = q_value(spec, x, y)
    if q == 0.0:
        raise SingularPointError(f"q = 0 at (x, y) = ({x!r}, {y!r})", "q")
    if not spec.has_angular_part:
        return q, None
    if x == 0.0:
        raise SingularPointError(f"x = 0: s = y/x undefined at y = {y!r}", "x")
    if spec.x_sign is not None and (x > 0) != (spec.x_sign > 0):
        raise ChartError(f"x = {x!r} lies outside the half-plane sign(x) = {spec.x_sign} of this spec")
    return q, y / x


def potential(spec: HamiltonianSpec, x: float, y: float, t: float = 0.0) -> float:
    """``V = Lambda(q,t)/2 + F_integral(y/x)/q``."""
    q, s = _chart(spec, x, y)
    v = 0.5 * spec.Lambda(q, t)
    if s is not None:
        v += spec.F_integral(s) / q
    return v


def potential_gradient(spec: HamiltonianSpec, x: float, y: float, t: float = 0.0) -> tuple[float, float]:
    """Analytic ``(dV/dx, dV/dy)``; Lambda'(q) and F fall back to central differences
    only when the HamiltonianSpec lacks their closed forms."""
    q, s = _chart(spec, x, y)
    qx = 2.0 * (spec.C * x - spec.B * y)
    qy = 2.0 * (spec.A * y - spec.B * x)
    dv_dq = 0.5 * spec.Lambda.derivative(q, t)
    if s is None:
        return dv_dq * qx, dv_dq * qy
    Fi = spec.F_integral(s)
    Fs = spec.F(s) / (q * x)
    dv_dq -= Fi / (q * q)
    return dv_dq * qx - Fs * s, dv_dq * qy + Fs


def hamiltonian(spec: HamiltonianSpec, state: PhaseState) -> float:
    px, py = state.px, state.py
    kin = 0.5 * spec.A * px * px + spec.B * px * py + 0.5 * spec.C * py * py
    return kin + potential(spec, state.x, state.y, state.t)


def admissible_frequency(spec: HamiltonianSpec, x: float, y: float, t: float = 0.0) -> float:
    """Squared frequency ``(B dV/dx + C dV/dy) / y`` compatible with the
    Hamiltonian flow."""
    if y == 0.0:
        raise SingularPointError("y = 0: admissible frequency divides by y", "y")
    vx, vy = potential_gradient(spec, x, y, t)
    return (spec.B * vx + spec.C * vy) / y


def canonical_rhs(spec: HamiltonianSpec, state: PhaseState) -> tuple[float, float, float, float]:
    """Hamilton's equations ``(dx, dy, dpx, dpy)``."""
    vx, vy = potential_gradient(spec, state.x, state.y, state.t)
    dx, dy = velocities(spec, state.px, state.py)
    return dx, dy, -vx, -vy


# -- Lewis-Ray-Reid invariant -------------------------------------------------


def lrri(system: "ElrrSystem | HamiltonianSpec", state: PhaseState,
         velocities: tuple[float, float] | None = None) -> float:
    """``I = (x vy - y vx)^2 / 2 + F_integral(y/x)``.

    Velocities are required for a plain :class:`ElrrSystem`; for a
    :class:`HamiltonianSpec` they default to the kinetic matrix applied to the
    state's momenta.
    """
    if velocities is None:
        if not isinstance(system, HamiltonianSpec):
            raise TypeError("velocities are required for a non-Hamiltonian ELRR system")
        velocities = _kinetic_velocities(system, state.px, state.py)
    vx, vy = velocities
    ang = state.x * vy - state.y * vx
    out = 0.5 * ang * ang
    if isinstance(system, HamiltonianSpec) and not system.has_angular_part:
        return out
    if state.x == 0.0:
        raise SingularPointError("x = 0: s = y/x undefined in the invariant", "x")
    return out + system.F_integral(state.y / state.x)


def lrri_generic(gsys: GenericElrrSystem, state: PhaseState, velocities: tuple[float, float],
                 lower_limit: float = DEFAULT_LOWER_LIMIT) -> float:
    """Invariant of the unreduced system: both ratio integrals taken from ``lower_limit``."""
    x, y = state.x, state.y
    if x == 0.0 or y == 0.0:
        raise SingularPointError("x = 0 or y = 0 in the generic invariant", "x" if x == 0.0 else "y")
    vx, vy = velocities
    ang = x * vy - y * vx
    fi = numerical_antiderivative(gsys.f, lower_limit)(y / x)
    gi = numerical_antiderivative(gsys.g, lower_limit)(x / y)
    return 0.5 * ang * ang + fi + gi


# -- reduction of the generic system -----------------------------------------


def reduce_system(gsys: GenericElrrSystem, lower_limit: float = DEFAULT_LOWER_LIMIT,
                  F_integral: Callable[[float], float] | None = None) -> ElrrSystem:
    """Fold ``g`` into the frequency and into ``F``.

    ``Omega^2 = omega^2 - g(x/y)/(x y^3)`` and ``F(s) = f(s) - g(1/s)/s^2``.
    ``F_integral`` is the quadrature of F from ``lower_limit`` unless a closed
    antiderivative is supplied.
    """
    f, g, w2 = gsys.f, gsys.g, gsys.omega2

    def Omega2(x: float, y: float, t: float) -> float:
        if x == 0.0:
            raise SingularPointError("x = 0 in the merged frequency", "x")
        if y == 0.0:
            raise SingularPointError("y = 0 in the merged frequency", "y")
        return w2(x, y, t) - g(x / y) / (x * y**3)

    def F(s: float) -> float:
        if s == 0.0:
            raise SingularPointError("y = 0 (s = 0): g(1/s) undefined", "y")
        return f(s) - g(1.0 / s) / (s * s)

    if F_integral is None:
        Fi = numerical_antiderivative(F, lower_limit)
        limit = lower_limit
    else:
        Fi, limit = F_integral, None
    return ElrrSystem(F, Fi, Omega2, limit, name=f"reduced({gsys.name})")


def elrr_rhs(system: ElrrSystem, t: float, x: float, y: float, vx: float, vy: float):
    """Second-order ELRR equations as a first-order system in (x, y, vx, vy)."""
    if x == 0.0 or y == 0.0:
        raise SingularPointError("x = 0 or y = 0 in the ELRR forcing", "x" if x == 0.0 else "y")
    w2 = system.Omega2(x, y, t)
    return vx, vy, -w2 * x + system.F(y / x) / (y * x * x), -w2 * y


# -- induced f-bar, g-bar and the compatibility constraint -------------------


def _induced_parts(spec: HamiltonianSpec, s: float):
    A, B, C = spec.A, spec.B, spec.C
    z = xi(spec, s)
    if z == 0.0:
        raise SingularDirectionError(f"xi(s) = 0 at s = {s!r}", s)
    dz = 2.0 * A * s - 2.0 * B
    r = spec.rho
    a = 2.0 * r * s / z**2
    b = s * (A * s - B) / z
    c = 2.0 * r * s**3 / z**2
    d = s * s * (B * s - C) / z
    da = 2.0 * r * (1.0 / z**2 - 2.0 * s * dz / z**3)
    db = ((2.0 * A * s - B) * z - s * (A * s - B) * dz) / z**2
    dc = 2.0 * r * (3.0 * s * s / z**2 - 2.0 * s**3 * dz / z**3)
    dd = ((3.0 * B * s * s - 2.0 * C * s) * z - s * s * (B * s - C) * dz) / z**2
    return (a, b, c, d), (da, db, dc, dd)


def induced_fbar_gbar(spec: HamiltonianSpec, s: float) -> tuple[float, float]:
    """Return ``(fbar(s), gbar(1/s))``, the forcing functions of the Hamiltonian
    system written in conventional ELRR form."""
    (a, b, c, d), _ = _induced_parts(spec, s)
    Fi, F = spec.F_integral(s), spec.F(s)
    return a * Fi + b * F, c * Fi + d * F


def constraint_residual(spec: HamiltonianSpec, s: float, method: str = "analytic") -> float:
    """Residual of the compatibility condition between fbar and gbar.

    ``gbar`` is treated as the function ``G(s) = gbar(1/s)``. With
    ``method="analytic"`` the s-derivatives come from the product rule with F
    and F'; ``method="fd"`` differentiates fbar and G by central differences.
    """
    if s == 0.0:
        raise SingularPointError("s = 0 in the constraint (term 2B/s)", "s")
    A, B, C = spec.A, spec.B, spec.C
    if method == "analytic":
        (a, b, c, d), (da, db, dc, dd) = _induced_parts(spec, s)
        Fi, F, dF = spec.F_integral(s), spec.F(s), spec.F.derivative(s)
        fb = a * Fi + b * F
        gb = c * Fi + d * F
        dfb = da * Fi + (a + db) * F + b * dF
        dgb = dc * Fi + (c + dd) * F + d * dF
    elif method == "fd":
        fb, gb = induced_fbar_gbar(spec, s)
        dfb = central_difference(lambda v: induced_fbar_gbar(spec, v)[0], s)
        dgb = central_difference(lambda v: induced_fbar_gbar(spec, v)[1], s)
    else:
        raise ValueError(f"unknown method {method!r}")
    return s * (B * s - C) * dfb + (C + 2.0 * B * s) * fb - (A * s - B) * dgb - (A + 2.0 * B / s) * gb
