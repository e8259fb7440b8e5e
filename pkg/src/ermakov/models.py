"""Catalog of worked systems and their closed-form orbits.

* ``calogero`` - the three-body Calogero problem reduced to Jacobi
  coordinates, with the integrable ``g4/(x^2+y^2)`` modification.
* ``noncentral`` - ``-sigma/r + (g1 + g2 cos(theta))/(r sin(theta))^2`` with the
  ``g3/r^2`` extension.
* ``cervero-lejarreta`` and ``goedert`` - the two older Hamiltonian Ermakov
  families, used as regression anchors.
* ``isotropic-oscillator`` - ``F = 0``, ``Lambda = q``.

Closed forms are written in the scaled time ``tau' = sqrt(2 I) tau`` where
``d tau = dt / q``. For shifted systems (``g4`` or ``g3`` nonzero) the radial
formulas take the *effective* invariant ``I + g4`` (resp. ``I + g3``) and
their own ``tau'`` scaling; the angular formulas keep the true ``I``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Callable, Mapping

import numpy as np
from scipy import integrate

from .core import HamiltonianSpec, PhaseState, hamiltonian, lrri
from .errors import ConfigError, NoRealOrbitError, ParameterInconsistencyError
from .expression import BinOp, Var, as_expression
from .functions import RealFunction

SQRT2, SQRT3, SQRT6 = math.sqrt(2.0), math.sqrt(3.0), math.sqrt(6.0)


# -- parameters ---------------------------------------------------------------


@dataclass(frozen=True)
class CalogeroParams:
    sigma: float = 1.0
    g1: float = 1.0
    g2: float = 1.0
    g3: float = 1.0
    g4: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        for name in ("g1", "g2", "g3", "g4"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class NoncentralParams:
    """``chart`` is the sign of x on which the ratio form of the potential is
    used: the ``g2 cos(theta)`` term is odd in x, so ``F_integral(s)`` depends
    on the half-plane."""

    sigma: float = 2.0
    g1: float = 1.0
    g2: float = 0.5
    g3: float = 0.0
    chart: int = 1

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        # zero couplings give the Coulomb limit; the band analysis needs g2 > 0
        for name in ("g1", "g2", "g3"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.chart not in (1, -1):
            raise ValueError("chart must be +1 or -1")


# -- Jacobi coordinates ---------------------------------------------------------


def jacobi_transform(x1: float, x2: float, x3: float) -> tuple[float, float, float]:
    """Centre of mass ``R`` and relative coordinates ``(x, y)`` of three unit masses."""
    return (x1 + x2 + x3) / 3.0, (x1 - x2) / SQRT2, (x1 + x2 - 2.0 * x3) / SQRT6


def inverse_jacobi_transform(R: float, x: float, y: float) -> tuple[float, float, float]:
    a = R + y / SQRT6
    return a + x / SQRT2, a - x / SQRT2, R - 2.0 * y / SQRT6


def calogero_three_body_potential(x1: float, x2: float, x3: float, p: CalogeroParams) -> float:
    """Potential of the modified three-body Hamiltonian on the line."""
    d12, d23, d31 = x1 - x2, x2 - x3, x3 - x1
    ssq = d12**2 + d23**2 + d31**2
    v = p.sigma**2 / 6.0 * ssq + p.g1 / d12**2 + p.g2 / d23**2 + p.g3 / d31**2
    if p.g4:
        v += 3.0 * p.g4 / ssq
    return v


def calogero_reduced_potential(x: float, y: float, p: CalogeroParams) -> float:
    """Reduced potential in Jacobi coordinates, written directly in (x, y)."""
    v = 0.5 * p.sigma**2 * (x * x + y * y) + p.g1 / (2 * x * x)
    v += 2 * p.g2 / (x - SQRT3 * y) ** 2 + 2 * p.g3 / (x + SQRT3 * y) ** 2
    if p.g4:
        v += p.g4 / (x * x + y * y)
    return v


# -- catalog specs --------------------------------------------------------------


def calogero_spec(p: CalogeroParams | None = None) -> HamiltonianSpec:
    """``A = C = 1``, ``B = 0``, ``Lambda = sigma^2 q + 2 g4/q`` and the
    closed antiderivative ``(1+s^2)/2 (g1 + 4 g2/(1-sqrt3 s)^2 + 4 g3/(1+sqrt3 s)^2)``.

    The principal sector ``|s| < 1/sqrt(3)`` (``x`` of either sign) is recorded
    as ``s_band``.
    """
    p = p or CalogeroParams()
    lam = f"{p.sigma**2!r}*q"
    if p.g4:
        lam += f" + {2 * p.g4!r}/q"
    Fi = (f"(1 + s^2)/2*({p.g1!r} + 4*{p.g2!r}/(1 - sqrt(3)*s)^2"
          f" + 4*{p.g3!r}/(1 + sqrt(3)*s)^2)")
    return HamiltonianSpec.from_expressions(
        1.0, 0.0, 1.0, lam, F_integral=Fi, name="calogero",
        s_band=(-1 / SQRT3, 1 / SQRT3), metadata={"params": asdict(p)},
    )


def noncentral_spec(p: NoncentralParams | None = None) -> HamiltonianSpec:
    """``A = C = 1``, ``B = 0``, ``Lambda = -2 sigma/sqrt(q) + 2 g3/q`` and
    ``F_integral(s) = (g1 + chart g2/sqrt(1+s^2)) (1+s^2)/s^2``, which equals
    ``(g1 + g2 cos(theta))/sin(theta)^2`` on the half-plane ``sign(x) = chart``.
    The returned HamiltonianSpec refuses points outside that half-plane.
    """
    p = p or NoncentralParams()
    lam = f"-{2 * p.sigma!r}/sqrt(q)"
    if p.g3:
        lam += f" + {2 * p.g3!r}/q"
    g2 = p.chart * p.g2
    Fi = f"({p.g1!r} + {g2!r}/sqrt(1 + s^2))*(1 + s^2)/s^2"
    return HamiltonianSpec.from_expressions(
        1.0, 0.0, 1.0, lam, F_integral=Fi, name="noncentral", x_sign=p.chart,
        metadata={"params": asdict(p), "chart": p.chart},
    )


def noncentral_cartesian_potential(x: float, y: float, p: NoncentralParams) -> float:
    r = math.hypot(x, y)
    return -p.sigma / r + p.g1 / y**2 + p.g2 * x / (y**2 * r) + p.g3 / r**2


def isotropic_oscillator_spec(omega2: float = 1.0) -> HamiltonianSpec:
    return HamiltonianSpec.from_expressions(1.0, 0.0, 1.0, f"{float(omega2)!r}*q",
                                            F_integral="0", name="isotropic-oscillator")


def literature_case(name: str, params: Mapping[str, Any] | None = None) -> HamiltonianSpec:
    """Older Hamiltonian Ermakov families as specs.

    ``cervero-lejarreta``
        ``A = C = 1``, ``B = 0``, ``Lambda = omega2(t) q``. Params: ``omega2``
        (expression in t, default ``"1"``) and ``F`` or ``F_integral``.
    ``goedert``
        ``A = C = 0``, ``B = 1``, ``Lambda(q) = 2 * integral_0^{-q/2} w2(u) du``.
        Params: ``w2`` (expression in u and optionally t, default ``"1"``) and
        ``F`` or ``F_integral``. The integral is numerical; ``dLambda/dq =
        -w2(-q/2)`` is exact.
    """
    params = dict(params or {})
    F_kw = {k: params.pop(k) for k in ("F", "F_integral", "lower_limit") if k in params}
    if name == "cervero-lejarreta":
        w2 = as_expression(params.pop("omega2", "1"), ("t",))
        _reject_unknown(name, params)
        lam = BinOp("*", w2, Var("q"))
        return HamiltonianSpec.from_expressions(1.0, 0.0, 1.0, lam, name=name, **F_kw)
    if name == "goedert":
        w2_expr = as_expression(params.pop("w2", "1"), ("u", "t"))
        _reject_unknown(name, params)
        w2 = w2_expr.compile(("u", "t"))

        def lam(q: float, t: float = 0.0) -> float:
            val, _ = integrate.quad(w2, 0.0, -0.5 * q, args=(t,), epsabs=1e-14, epsrel=1e-13)
            return 2.0 * val

        def dlam(q: float, t: float = 0.0) -> float:
            return -w2(-0.5 * q, t)

        base = HamiltonianSpec.from_expressions(0.0, 1.0, 0.0, "q", name=name, **F_kw)
        lam_fn = RealFunction(lam, dlam, f"2*int_0^(-q/2) {w2_expr}", args=("q", "t"))
        return HamiltonianSpec(
            base.A, base.B, base.C, lam_fn, base.F_integral, base.F,
            lambda_time_dependent="t" in w2_expr.variables, lower_limit=base.lower_limit,
            name=name, metadata={**base.metadata, "Lambda": lam_fn.label, "Lambda_lower_limit": 0.0},
        )
    raise ConfigError(f"unknown literature case {name!r}", "system.catalog")


def _reject_unknown(name: str, params: Mapping[str, Any]) -> None:
    if params:
        raise ConfigError(f"unknown parameter(s) {sorted(params)} for {name}", "system.params")


# -- Calogero closed forms ------------------------------------------------------


def calogero_q_closed(H: float, I: float, c1: float, tau_p, sigma: float = 1.0):
    """``q(tau') = 2I / (H - sqrt(H^2 - 2 sigma^2 I) sin(2(tau' + c1)))``."""
    if not I > 0:
        raise NoRealOrbitError(f"I must be positive, got {I!r}")
    disc = H * H - 2.0 * sigma**2 * I
    if disc < 0 or H <= 0:
        raise NoRealOrbitError(f"H^2 < 2 sigma^2 I or H <= 0 (H={H!r}, I={I!r})")
    return 2.0 * I / (H - math.sqrt(disc) * np.sin(2.0 * (np.asarray(tau_p) + c1)))


def calogero_q_range(H: float, I: float, sigma: float = 1.0) -> tuple[float, float]:
    d = math.sqrt(H * H - 2.0 * sigma**2 * I)
    return 2.0 * I / (H + d), 2.0 * I / (H - d)


def calogero_t_closed(H: float, I: float, c1: float, tau_p, sigma: float = 1.0):
    """Original time along the closed-form q, up to an additive constant.

    Integrates ``dt = q d tau = q d tau' / sqrt(2I)`` exactly; the arctangent is
    unwrapped so the result is continuous and increasing.
    """
    d = math.sqrt(H * H - 2.0 * sigma**2 * I)
    half = np.asarray(tau_p, dtype=float) + c1  # theta/2 with theta = 2(tau' + c1)
    k = np.floor((half + 0.5 * np.pi) / np.pi)
    root = sigma * math.sqrt(2.0 * I)
    return (np.arctan((H * np.tan(half) - d) / root) + k * np.pi) / sigma


def fit_calogero_c1(H: float, I: float, q0: float, dq_sign: float, sigma: float = 1.0) -> float:
    """``c1`` with ``q(0) = q0`` and ``sign(dq/dtau) = dq_sign`` at ``tau' = 0``."""
    d = math.sqrt(max(H * H - 2.0 * sigma**2 * I, 0.0))
    if d == 0.0:
        return 0.0
    v = min(1.0, max(-1.0, (H - 2.0 * I / q0) / d))
    a = math.asin(v)
    return 0.5 * (a if dq_sign >= 0 else math.pi - a)


def calogero_s_closed(I: float, g: float, c2: float, tau_p, sector: int = 0):
    """``s(tau') = tan((n pi + asin(k sin(3(tau' + c2))))/3)``, ``k^2 = 1 - 9g/(2I)``.

    ``sector`` n in {-1, 0, 1} picks the wedge between collinear directions.
    For ``k < 1`` the arcsine argument stays inside (-1, 1) and no fold
    occurs; for ``g = 0`` (``k = 1``) the arcsine is unfolded to its argument so
    that s stays continuous.
    """
    if not I > 0:
        raise NoRealOrbitError(f"I must be positive, got {I!r}")
    k2 = 1.0 - 9.0 * g / (2.0 * I)
    if k2 < 0:
        raise NoRealOrbitError(f"2I < 9g (I={I!r}, g={g!r})")
    arg = 3.0 * (np.asarray(tau_p, dtype=float) + c2)
    inner = arg if k2 == 1.0 else np.arcsin(math.sqrt(k2) * np.sin(arg))
    return np.tan((sector * np.pi + inner) / 3.0)


def calogero_sector(s: float) -> int:
    if abs(s) < 1 / SQRT3:
        return 0
    return 1 if s > 0 else -1


def fit_calogero_c2(I: float, g: float, s0: float, ds_sign: float) -> tuple[float, int]:
    """``(c2, sector)`` reproducing ``s0`` at ``tau' = 0`` with the given direction."""
    n = calogero_sector(s0)
    k = math.sqrt(max(1.0 - 9.0 * g / (2.0 * I), 0.0))
    if k == 0.0:
        return 0.0, n
    u0 = (-1) ** n * math.sin(3.0 * math.atan(s0))
    if k == 1.0:
        return math.atan(s0) - n * math.pi / 3.0, n
    v = min(1.0, max(-1.0, u0 / k))
    a = math.asin(v)
    return (a if ds_sign >= 0 else math.pi - a) / 3.0, n


# -- noncentral closed forms ----------------------------------------------------


def noncentral_r_closed(H: float, I: float, c1: float, tau_p, sigma: float = 2.0):
    """``r(tau') = I / (sigma/2 - sqrt(sigma^2/4 + H I) sin(tau' + c1))``."""
    if not I > 0:
        raise NoRealOrbitError(f"I must be positive, got {I!r}")
    rad = 0.25 * sigma**2 + H * I
    if rad < 0:
        raise NoRealOrbitError(f"sigma^2/4 + H I < 0 (H={H!r}, I={I!r})")
    return I / (0.5 * sigma - math.sqrt(rad) * np.sin(np.asarray(tau_p) + c1))


def fit_noncentral_c1(H: float, I: float, r0: float, dr_sign: float, sigma: float = 2.0) -> float:
    e = math.sqrt(max(0.25 * sigma**2 + H * I, 0.0))
    if e == 0.0:
        return 0.0
    v = min(1.0, max(-1.0, (0.5 * sigma - I / r0) / e))
    a = math.asin(v)
    return a if dr_sign >= 0 else math.pi - a


def noncentral_t_closed(H: float, I: float, c1: float, tau_p, sigma: float = 2.0):
    """Original time along the bounded (H < 0) closed-form r, up to a constant.

    Uses ``int dphi/(a - b sin phi)^2 = -b cos(phi)/((a^2-b^2)(a - b sin phi))
    + a/(a^2-b^2) int dphi/(a - b sin phi)`` with an unwrapped arctangent.
    """
    if not H < 0:
        raise NoRealOrbitError("closed-form time map needs bounded motion (H < 0)")
    a = 0.5 * sigma
    b = math.sqrt(max(a * a + H * I, 0.0))
    w2 = a * a - b * b
    w = math.sqrt(w2)
    phi = np.asarray(tau_p, dtype=float) + c1
    half = 0.5 * phi
    k = np.floor((half + 0.5 * np.pi) / np.pi)
    j1 = 2.0 / w * (np.arctan((a * np.tan(half) - b) / w) + k * np.pi)
    j2 = -b * np.cos(phi) / (w2 * (a - b * np.sin(phi))) + a / w2 * j1
    return I * I / math.sqrt(2.0 * I) * j2


def _cos_radicand(I: float, g1: float, g2: float) -> float:
    rad = 1.0 + 4.0 * I * (I - g1) / g2**2
    if rad < 0:
        raise NoRealOrbitError(f"1 + 4I(I - g1)/g2^2 < 0 (I={I!r}, g1={g1!r}, g2={g2!r})")
    return rad


def noncentral_costheta_closed(I: float, g1: float, g2: float, c2: float, tau_p):
    """``cos(theta) = -(g2/2I) (1 - sqrt(1 + 4I(I-g1)/g2^2) sin(tau' + c2))``."""
    if not I > 0:
        raise NoRealOrbitError(f"I must be positive, got {I!r}")
    root = math.sqrt(_cos_radicand(I, g1, g2))
    c = -(g2 / (2.0 * I)) * (1.0 - root * np.sin(np.asarray(tau_p) + c2))
    if np.any(np.abs(c) > 1.0 + 1e-12):
        raise ParameterInconsistencyError("closed-form cos(theta) leaves [-1, 1]")
    return c


def fit_noncentral_c2(I: float, g1: float, g2: float, cos0: float, dcos_sign: float) -> float:
    root = math.sqrt(_cos_radicand(I, g1, g2))
    if root == 0.0:
        return 0.0
    v = min(1.0, max(-1.0, (1.0 + 2.0 * I * cos0 / g2) / root))
    a = math.asin(v)
    return a if dcos_sign >= 0 else math.pi - a


@dataclass(frozen=True)
class ChiBounds:
    lower: float
    upper: float

    @property
    def second_excluded_sector(self) -> bool:
        """True when bounded orbits also avoid a wedge around theta = pi."""
        return self.lower > -1.0

    def __iter__(self):
        return iter((self.lower, self.upper))


def chi_bounds(I: float, g1: float, g2: float) -> ChiBounds:
    """Band ``chi_minus <= cos(theta) <= chi_plus`` of bounded noncentral motion."""
    if not I > 0 or not g2 > 0:
        raise NoRealOrbitError("chi bounds need I > 0 and g2 > 0")
    root = math.sqrt(_cos_radicand(I, g1, g2))
    f = g2 / (2.0 * I)
    return ChiBounds(-f * (1.0 + root), -f * (1.0 - root))


# -- fitted closed-form orbits --------------------------------------------------


def _polar_rates(state: PhaseState) -> tuple[float, float, float]:
    """(r, dr/dt, d cos(theta)/dt) for unit-mass Cartesian motion."""
    x, y, vx, vy = state.x, state.y, state.px, state.py
    r = math.hypot(x, y)
    rdot = (x * vx + y * vy) / r
    return r, rdot, (vx * r - x * rdot) / (r * r)


@dataclass(frozen=True)
class CalogeroOrbit:
    """Closed-form orbit of the equal-coupling Calogero system fitted to a state."""

    params: CalogeroParams
    H: float
    I: float
    c1: float
    c2: float
    sector: int
    t0: float

    @classmethod
    def fit(cls, params: CalogeroParams, state: PhaseState) -> "CalogeroOrbit":
        if not (params.g1 == params.g2 == params.g3):
            raise ValueError("the closed form for s needs g1 = g2 = g3")
        spec = calogero_spec(params)
        H, I = hamiltonian(spec, state), lrri(spec, state)
        x, y, vx, vy = state.x, state.y, state.px, state.py
        q0 = x * x + y * y
        c1 = fit_calogero_c1(H, I + params.g4, q0, x * vx + y * vy, params.sigma)
        s_dot = (vy * x - y * vx) / (x * x)
        c2, n = fit_calogero_c2(I, params.g1, y / x, s_dot)
        return cls(params, H, I, c1, c2, n, state.t)

    @property
    def I_eff(self) -> float:
        return self.I + self.params.g4

    def tau_of_t(self, t) -> np.ndarray:
        """Invert the closed-form time map (monotone) for ``tau`` (unscaled)."""
        from scipy.optimize import brentq

        root = math.sqrt(2.0 * self.I_eff)
        T = lambda tp: (calogero_t_closed(self.H, self.I_eff, self.c1, tp, self.params.sigma)
                        - calogero_t_closed(self.H, self.I_eff, self.c1, 0.0, self.params.sigma))
        out = []
        # dt/dtau' is bounded by q_max / sqrt(2I), which gives a safe bracket
        qmax = calogero_q_range(self.H, self.I_eff, self.params.sigma)[1]
        qmin = calogero_q_range(self.H, self.I_eff, self.params.sigma)[0]
        for tt in np.atleast_1d(t):
            dt = tt - self.t0
            if dt == 0.0:
                out.append(0.0)
                continue
            hi = dt * root / qmin * 1.01 + 1e-12
            lo = dt * root / qmax * 0.99
            out.append(brentq(lambda tp: float(T(tp)) - dt, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200) / root)
        return np.array(out)

    def q_at(self, t) -> np.ndarray:
        tau = self.tau_of_t(t)
        return calogero_q_closed(self.H, self.I_eff, self.c1, math.sqrt(2 * self.I_eff) * tau, self.params.sigma)

    def s_at(self, t) -> np.ndarray:
        tau = self.tau_of_t(t)
        return calogero_s_closed(self.I, self.params.g1, self.c2, math.sqrt(2 * self.I) * tau, self.sector)


@dataclass(frozen=True)
class NoncentralOrbit:
    """Closed-form bounded orbit of the noncentral system fitted to a state."""

    params: NoncentralParams
    H: float
    I: float
    c1: float
    c2: float
    t0: float

    @classmethod
    def fit(cls, params: NoncentralParams, state: PhaseState) -> "NoncentralOrbit":
        spec = noncentral_spec(params)
        H, I = hamiltonian(spec, state), lrri(spec, state)
        r, rdot, cdot = _polar_rates(state)
        c1 = fit_noncentral_c1(H, I + params.g3, r, rdot, params.sigma)
        c2 = fit_noncentral_c2(I, params.g1, params.g2, state.x / r, cdot)
        return cls(params, H, I, c1, c2, state.t)

    @property
    def I_eff(self) -> float:
        return self.I + self.params.g3

    def tau_of_t(self, t) -> np.ndarray:
        from scipy.optimize import brentq

        root = math.sqrt(2.0 * self.I_eff)
        sig = self.params.sigma
        T0 = noncentral_t_closed(self.H, self.I_eff, self.c1, 0.0, sig)
        e = math.sqrt(0.25 * sig**2 + self.H * self.I_eff)
        rmin, rmax = self.I_eff / (0.5 * sig + e), self.I_eff / (0.5 * sig - e)
        out = []
        for tt in np.atleast_1d(t):
            dt = tt - self.t0
            if dt == 0.0:
                out.append(0.0)
                continue
            lo = dt * root / rmax**2 * 0.99
            hi = dt * root / rmin**2 * 1.01 + 1e-12
            f = lambda tp: float(noncentral_t_closed(self.H, self.I_eff, self.c1, tp, sig) - T0) - dt
            out.append(brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200) / root)
        return np.array(out)

    def r_at(self, t) -> np.ndarray:
        tau = self.tau_of_t(t)
        return noncentral_r_closed(self.H, self.I_eff, self.c1, math.sqrt(2 * self.I_eff) * tau, self.params.sigma)

    def costheta_at(self, t) -> np.ndarray:
        tau = self.tau_of_t(t)
        p = self.params
        return noncentral_costheta_closed(self.I, p.g1, p.g2, self.c2, math.sqrt(2 * self.I) * tau)


# -- registry -------------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    build: Callable[[Mapping[str, Any]], HamiltonianSpec]
    param_names: tuple[str, ...]


def _dataclass_builder(cls, fn):
    names = tuple(f.name for f in fields(cls))

    def build(params: Mapping[str, Any]) -> HamiltonianSpec:
        unknown = set(params) - set(names)
        if unknown:
            raise ConfigError(f"unknown parameter(s) {sorted(unknown)}", "system.params")
        try:
            return fn(cls(**params))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), "system.params") from exc

    return build, names


def _registry() -> dict[str, CatalogEntry]:
    cal, cal_names = _dataclass_builder(CalogeroParams, calogero_spec)
    non, non_names = _dataclass_builder(NoncentralParams, noncentral_spec)
    return {
        "calogero": CatalogEntry(
            "calogero", "three-body Calogero system in Jacobi coordinates (+ g4/r^2 modification)",
            cal, cal_names),
        "noncentral": CatalogEntry(
            "noncentral", "noncentral potential with dynamic symmetry (+ g3/r^2 extension)",
            non, non_names),
        "cervero-lejarreta": CatalogEntry(
            "cervero-lejarreta", "A=C=1, B=0, Lambda = omega2(t) q",
            lambda prm: literature_case("cervero-lejarreta", prm), ("omega2", "F", "F_integral", "lower_limit")),
        "goedert": CatalogEntry(
            "goedert", "A=C=0, B=1, Lambda = 2 int_0^{-q/2} w2(u) du",
            lambda prm: literature_case("goedert", prm), ("w2", "F", "F_integral", "lower_limit")),
        "isotropic-oscillator": CatalogEntry(
            "isotropic-oscillator", "F = 0, Lambda = omega2 q",
            lambda prm: isotropic_oscillator_spec(**prm), ("omega2",)),
    }


CATALOG = _registry()


def catalog_spec(name: str, params: Mapping[str, Any] | None = None) -> HamiltonianSpec:
    try:
        entry = CATALOG[name]
    except KeyError:
        raise ConfigError(f"unknown catalog system {name!r}; known: {sorted(CATALOG)}",
                          "system.catalog") from None
    try:
        return entry.build(dict(params or {}))
    except TypeError as exc:
        raise ConfigError(str(exc), "system.params") from exc
