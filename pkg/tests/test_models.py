import math
import random

import numpy as np
import pytest
from scipy.integrate import quad

from ermakov import (
    CATALOG,
    CalogeroOrbit,
    CalogeroParams,
    ConfigError,
    IntegratorConfig,
    NoncentralOrbit,
    NoncentralParams,
    PhaseState,
    calogero_q_closed,
    calogero_s_closed,
    calogero_spec,
    catalog_spec,
    chi_bounds,
    hamiltonian,
    integrate,
    jacobi_transform,
    literature_case,
    lrri,
    noncentral_costheta_closed,
    noncentral_r_closed,
    noncentral_spec,
    potential,
    quadrature_pipeline,
    solve_separable_s,
    to_qs,
)
from ermakov.errors import ChartError, NoRealOrbitError, ParameterInconsistencyError, SingularityApproachError
from ermakov.models import (
    calogero_reduced_potential,
    calogero_three_body_potential,
    inverse_jacobi_transform,
)

from _benchmarks import CALOGERO, CALOGERO_STATE, NONCENTRAL, NONCENTRAL_STATE, calogero
from _oracles import SQ3, calogero_V, central_diff

TIGHT = IntegratorConfig("adaptive-embedded-rk", 1e-12, 1e-12)


def d5(f, v, h=1e-3):
    """Five-point central difference."""
    return (-f(v + 2 * h) + 8 * f(v + h) - 8 * f(v - h) + f(v - 2 * h)) / (12 * h)


# -- parameters ------------------------------------------------------------------


@pytest.mark.parametrize("kw", [{"sigma": 0.0}, {"g1": -1.0}, {"g4": -0.1}])
def test_calogero_params_validation(kw):
    with pytest.raises(ValueError):
        CalogeroParams(**kw)


@pytest.mark.parametrize("kw", [{"sigma": -2.0}, {"g2": -0.5}, {"g3": -1.0}, {"chart": 0}])
def test_noncentral_params_validation(kw):
    with pytest.raises(ValueError):
        NoncentralParams(**kw)


# -- Jacobi coordinates ----------------------------------------------------------


def test_jacobi_examples():
    assert jacobi_transform(1, 1, 1) == (1.0, 0.0, 0.0)
    R, x, y = jacobi_transform(1, 0, 0)
    assert (R, x, y) == pytest.approx((1 / 3, 1 / math.sqrt(2), 1 / math.sqrt(6)), abs=1e-16)


def test_jacobi_round_trip_and_separations():
    rng = random.Random(1)
    for _ in range(100):
        xs = [rng.uniform(-5, 5) for _ in range(3)]
        back = inverse_jacobi_transform(*jacobi_transform(*xs))
        assert max(abs(a - b) for a, b in zip(xs, back)) < 1e-14
        _, x, y = jacobi_transform(*xs)
        seps = (xs[0] - xs[1]) ** 2 + (xs[1] - xs[2]) ** 2 + (xs[2] - xs[0]) ** 2
        assert seps == pytest.approx(3 * (x * x + y * y), rel=1e-13)


def test_three_body_potential_reduces():
    p = CalogeroParams(sigma=1.3, g1=0.5, g2=0.8, g3=1.1, g4=0.4)
    rng = random.Random(2)
    for _ in range(20):
        xs = [rng.uniform(-3, 3) for _ in range(3)]
        _, x, y = jacobi_transform(*xs)
        v3 = calogero_three_body_potential(*xs, p)
        assert v3 == pytest.approx(calogero_reduced_potential(x, y, p), rel=1e-12)
        assert v3 == pytest.approx(potential(calogero_spec(p), x, y), rel=1e-12)


# -- Calogero --------------------------------------------------------------------


def test_calogero_spec_potential():
    assert potential(calogero(), 1.0, 1.0) == pytest.approx(calogero_V(1.0, 1.0), rel=1e-14)


def test_calogero_free_reduction_is_isotropic():
    spec = calogero_spec(CalogeroParams(g1=0, g2=0, g3=0, g4=0))
    for x, y in [(1.0, 0.5), (-0.3, 2.0)]:
        assert potential(spec, x, y) == pytest.approx(0.5 * (x * x + y * y), rel=1e-15)


@pytest.mark.parametrize("s", [0.0, 0.3])
def test_calogero_F_matches_fd(s):
    spec = calogero()
    assert spec.F(s) == pytest.approx(central_diff(spec.F_integral, s), abs=1e-8)


def test_calogero_q_closed_examples():
    assert calogero_q_closed(3.0, 2.0, 0.0, 0.0) == pytest.approx(4.0 / 3.0, rel=1e-15)
    tp = np.linspace(0, math.pi, 2001)
    q = calogero_q_closed(3.0, 2.0, 0.0, tp)
    assert q.min() == pytest.approx(4 / (3 + math.sqrt(5)), rel=1e-6)
    assert q.max() == pytest.approx(4 / (3 - math.sqrt(5)), rel=1e-6)
    with pytest.raises(NoRealOrbitError):
        calogero_q_closed(1.0, 2.0, 0.0, 0.0)


@pytest.mark.parametrize("sigma", [1.0, 1.7])
def test_calogero_q_closed_satisfies_ode(sigma):
    H, I, c1 = 5.0, 2.0, 0.3
    r2I = math.sqrt(2 * I)
    q = lambda tau: float(calogero_q_closed(H, I, c1, r2I * tau, sigma))
    for tau in np.linspace(0.05, 2.0, 15):
        v = q(tau)
        lhs = d5(q, tau, 1e-4) ** 2
        assert lhs == pytest.approx(4 * v * v * (2 * H * v - sigma**2 * v * v - 2 * I), rel=1e-9, abs=1e-9)


def test_calogero_s_closed_examples():
    assert calogero_s_closed(5.0, 1.0, 0.0, 0.0) == 0.0
    tp = np.linspace(0, 3, 7)
    np.testing.assert_array_equal(calogero_s_closed(4.5, 1.0, 0.2, tp), np.zeros(7))
    with pytest.raises(NoRealOrbitError):
        calogero_s_closed(4.0, 1.0, 0.0, 0.0)


def test_calogero_s_closed_satisfies_ode():
    I, g, c2 = 6.0, 1.0, 0.1
    r2I = math.sqrt(2 * I)
    s = lambda tau: float(calogero_s_closed(I, g, c2, r2I * tau))
    Fi = lambda v: 0.5 * (1 + v * v) * (g + 4 * g / (1 - SQ3 * v) ** 2 + 4 * g / (1 + SQ3 * v) ** 2)
    for tau in np.linspace(0.02, 1.5, 15):
        v = s(tau)
        lhs = d5(s, tau, 1e-4) ** 2
        assert lhs == pytest.approx(2 * (1 + v * v) ** 2 * (I - Fi(v)), rel=1e-8, abs=1e-9)


def test_calogero_s_free_case_is_continuous():
    # g = 0: the arcsine is unfolded, s = tan(tau' + c2) away from the poles
    tp = np.linspace(0.0, 0.5, 11)
    np.testing.assert_allclose(calogero_s_closed(2.0, 0.0, 0.1, tp), np.tan(tp + 0.1), rtol=1e-13)


def test_calogero_s_closed_matches_solver():
    spec = calogero()
    orbit = CalogeroOrbit.fit(CALOGERO, CALOGERO_STATE)
    qs = to_qs(spec, CALOGERO_STATE)
    sol = solve_separable_s(spec, orbit.I, qs.s, qs.sign_ds, 2.0, num=201)
    want = calogero_s_closed(orbit.I, 1.0, orbit.c2, math.sqrt(2 * orbit.I) * sol.tau, orbit.sector)
    assert np.max(np.abs(sol.values - want)) < 1e-9


@pytest.mark.parametrize("sigma", [1.0, 2.5])
def test_calogero_orbit_matches_integration(sigma):
    p = CalogeroParams(sigma=sigma)
    orbit = CalogeroOrbit.fit(p, CALOGERO_STATE)
    T = np.linspace(0, math.pi / sigma, 61)
    R = integrate(calogero_spec(p), CALOGERO_STATE, T[-1], TIGHT, keep_dense=True).sample(T)
    assert np.max(np.abs(orbit.q_at(T) - (R[:, 0] ** 2 + R[:, 1] ** 2))) < 1e-6
    assert np.max(np.abs(orbit.s_at(T) - R[:, 1] / R[:, 0])) < 1e-6


def test_calogero_orbit_needs_equal_couplings():
    with pytest.raises(ValueError):
        CalogeroOrbit.fit(CalogeroParams(g1=1.0, g2=2.0), CALOGERO_STATE)


def test_calogero_g4_orbit():
    p = CalogeroParams(g4=0.7)
    orbit = CalogeroOrbit.fit(p, CALOGERO_STATE)
    T = np.linspace(0, 3.0, 31)
    R = integrate(calogero_spec(p), CALOGERO_STATE, 3.0, TIGHT, keep_dense=True).sample(T)
    assert np.max(np.abs(orbit.q_at(T) - (R[:, 0] ** 2 + R[:, 1] ** 2))) < 1e-6
    assert np.max(np.abs(orbit.s_at(T) - R[:, 1] / R[:, 0])) < 1e-6


# -- noncentral ------------------------------------------------------------------


def test_noncentral_potential_value():
    spec = noncentral_spec(NoncentralParams(chart=1))
    assert potential(spec, 0.6, 0.8) == pytest.approx(0.03125, abs=1e-14)


def test_noncentral_coulomb_limit():
    spec = noncentral_spec(NoncentralParams(sigma=2, g1=0, g2=0, g3=0))
    for x, y in [(0.6, 0.8), (1.5, -2.0)]:
        assert potential(spec, x, y) == pytest.approx(-2 / math.hypot(x, y), rel=1e-14)


def test_noncentral_F_integral_theta_form():
    p = NoncentralParams(g1=1.3, g2=0.4, chart=1)
    th = math.pi / 4
    want = (p.g1 + p.g2 * math.cos(th)) / math.sin(th) ** 2
    assert noncentral_spec(p).F_integral(math.tan(th)) == pytest.approx(want, rel=1e-14)


def test_noncentral_r_closed_examples():
    assert noncentral_r_closed(-0.5, 1.3, 0.0, 0.0) == pytest.approx(1.3, rel=1e-15)
    I = 1.6
    r = noncentral_r_closed(-1 / I, I, 0.4, np.linspace(0, 6, 13))
    np.testing.assert_allclose(r, I, rtol=1e-15)
    with pytest.raises(NoRealOrbitError):
        noncentral_r_closed(-2.0, 1.0, 0.0, 0.0)


@pytest.mark.parametrize("sigma", [2.0, 3.0])
def test_noncentral_r_closed_satisfies_ode(sigma):
    H, I, c1 = -0.4, 1.2, 0.2
    r2I = math.sqrt(2 * I)
    r = lambda tau: float(noncentral_r_closed(H, I, c1, r2I * tau, sigma))
    for tau in np.linspace(0.1, 4.0, 15):
        v = r(tau)
        lhs = d5(r, tau, 1e-4) ** 2
        assert lhs == pytest.approx(2 * v * v * (H * v * v + sigma * v - I), rel=1e-9, abs=1e-9)


def test_noncentral_costheta_examples():
    g2 = 0.5
    assert noncentral_costheta_closed(1.0, 1.0, g2, 0.0, 0.0) == pytest.approx(-g2 / 2, rel=1e-15)
    c = noncentral_costheta_closed(1.0, 1.0, g2, 0.0, np.linspace(0, 2 * math.pi, 4001))
    assert c.min() == pytest.approx(-g2, abs=1e-6) and c.max() == pytest.approx(0.0, abs=1e-6)
    with pytest.raises(NoRealOrbitError):
        noncentral_costheta_closed(0.5, 1.0, 0.1, 0.0, 0.0)
    with pytest.raises(ParameterInconsistencyError):
        noncentral_costheta_closed(0.2, 0.5, 1.0, 0.0, -math.pi / 2)


def test_noncentral_costheta_satisfies_ode():
    I, g1, g2, c2 = 1.4, 1.0, 0.5, 0.3
    r2I = math.sqrt(2 * I)
    c = lambda tau: float(noncentral_costheta_closed(I, g1, g2, c2, r2I * tau))
    # (dc/dtau)^2 = 2 (I (1 - c^2) - g1 - g2 c), from the angular equation with c = cos(theta)
    for tau in np.linspace(0.05, 4.0, 15):
        v = c(tau)
        assert d5(c, tau, 1e-4) ** 2 == pytest.approx(2 * (I * (1 - v * v) - g1 - g2 * v), rel=1e-8, abs=1e-9)


@pytest.mark.parametrize("params,state", [
    (NONCENTRAL, NONCENTRAL_STATE),
    (NoncentralParams(sigma=3.0, g1=1.5, g2=0.6, chart=-1),
     PhaseState(0, -0.13891854213354424, 0.7878462024097664, -0.17493405824864633, 0.07069706687451195)),
])
def test_noncentral_orbit_matches_integration(params, state):
    orbit = NoncentralOrbit.fit(params, state)
    assert orbit.H < 0
    T = np.linspace(0, 8.0, 81)
    R = integrate(noncentral_spec(params), state, 8.0, TIGHT, keep_dense=True).sample(T)
    r = np.hypot(R[:, 0], R[:, 1])
    assert np.max(np.abs(orbit.r_at(T) - r)) < 1e-6
    assert np.max(np.abs(orbit.costheta_at(T) - R[:, 0] / r)) < 1e-6


def test_noncentral_chart_is_enforced():
    # every bounded orbit has chi_minus < 0, so chart +1 orbits reach x = 0
    p = NoncentralParams(sigma=3.0, g1=0.6, g2=0.4, chart=1)
    st = PhaseState(0, 0.5, 0.9, 0.1, -0.3)
    assert chi_bounds(lrri(noncentral_spec(p), st), p.g1, p.g2).lower < 0
    with pytest.raises(ChartError):
        potential(noncentral_spec(p), -0.5, 0.9)
    with pytest.raises(SingularityApproachError):
        integrate(noncentral_spec(p), st, 8.0)
    with pytest.raises(ChartError):
        quadrature_pipeline(noncentral_spec(p), st, 8.0)


def test_noncentral_g3_orbit():
    p = NoncentralParams(sigma=2.0, g1=1.0, g2=0.5, g3=0.3, chart=-1)
    orbit = NoncentralOrbit.fit(p, NONCENTRAL_STATE)
    T = np.linspace(0, 6.0, 31)
    R = integrate(noncentral_spec(p), NONCENTRAL_STATE, 6.0, TIGHT, keep_dense=True).sample(T)
    assert np.max(np.abs(orbit.r_at(T) - np.hypot(R[:, 0], R[:, 1]))) < 1e-6


def test_escaping_orbit_takes_infinite_time():
    H, I, sigma = 0.3, 1.0, 2.0
    e = math.sqrt(0.25 * sigma**2 + H * I)
    # r diverges where sin(tau') = sigma / (2 e)
    tp_star = math.asin(0.5 * sigma / e)
    r = lambda tp: float(noncentral_r_closed(H, I, 0.0, tp, sigma))
    times = [quad(lambda u: r(u) ** 2, 0.0, tp_star - eps, limit=200)[0] / math.sqrt(2 * I)
             for eps in (1e-1, 1e-2, 1e-3)]
    # t ~ 1/eps near the divergence
    assert times[1] > 5 * times[0] and times[2] > 5 * times[1]


# -- chi band --------------------------------------------------------------------


def test_chi_bounds_collapse():
    b = chi_bounds(1.0, 1.0, 0.5)
    assert (b.lower, b.upper) == pytest.approx((-0.5, 0.0), abs=1e-16)
    lo, hi = b
    assert lo == b.lower and hi == b.upper


def test_chi_upper_below_one_and_second_sector_condition():
    rng = random.Random(13)
    seen = {True: 0, False: 0}
    for _ in range(2000):
        I, g1, g2 = rng.uniform(0.01, 4), rng.uniform(0.01, 4), rng.uniform(0.01, 4)
        try:
            b = chi_bounds(I, g1, g2)
        except NoRealOrbitError:
            continue
        assert b.upper < 1
        expected = 2 * I > g2 and g1 > g2
        assert b.second_excluded_sector == expected
        seen[expected] += 1
    assert min(seen.values()) > 50


@pytest.mark.parametrize("I,g1,g2,expected", [
    (1.0, 1.0, 0.5, True),    # both 2I > g2 and g1 > g2
    (0.2, 1.1, 1.0, False),   # g1 > g2 alone is not enough
    (1.0, 0.3, 0.5, False),   # 2I > g2 alone is not enough
])
def test_second_sector_needs_both_conditions(I, g1, g2, expected):
    b = chi_bounds(I, g1, g2)
    assert b.second_excluded_sector is expected
    assert (b.lower > -1) is expected


def test_chi_bounds_errors():
    with pytest.raises(NoRealOrbitError):
        chi_bounds(0.5, 1.0, 0.1)
    with pytest.raises(NoRealOrbitError):
        chi_bounds(-1.0, 1.0, 0.5)


# -- literature cases and catalog -----------------------------------------------


def test_cervero_lejarreta_isotropic():
    spec = literature_case("cervero-lejarreta", {"omega2": "1"})
    for x, y in [(1.0, 0.5), (-2.0, 0.3)]:
        assert potential(spec, x, y) == pytest.approx(0.5 * (x * x + y * y), rel=1e-15)
    assert not spec.lambda_time_dependent
    assert literature_case("cervero-lejarreta", {"omega2": "1 + cos(t)"}).lambda_time_dependent


def test_goedert_structure():
    spec = literature_case("goedert", {"w2": "1 + u^2", "F": "1/s^2"})
    assert spec.rho == -1
    assert (spec.A, spec.B, spec.C) == (0.0, 1.0, 0.0)
    # Lambda = 2 int_0^{-q/2} (1 + u^2) du
    q = -3.0
    assert spec.Lambda(q, 0.0) == pytest.approx(2 * (1.5 + 1.5**3 / 3), rel=1e-12)
    assert spec.Lambda.derivative(q, 0.0) == pytest.approx(-(1 + 1.5**2), rel=1e-15)


def test_literature_unknown():
    with pytest.raises(ConfigError) as info:
        literature_case("nope")
    assert info.value.field == "system.catalog"
    with pytest.raises(ConfigError) as info:
        literature_case("goedert", {"omega": "1"})
    assert info.value.field == "system.params"


def test_catalog_entries_build():
    assert set(CATALOG) == {"calogero", "noncentral", "cervero-lejarreta", "goedert", "isotropic-oscillator"}
    for name in CATALOG:
        spec = catalog_spec(name)
        assert spec.rho != 0


def test_catalog_errors_name_field():
    with pytest.raises(ConfigError) as info:
        catalog_spec("kepler")
    assert info.value.field == "system.catalog"
    with pytest.raises(ConfigError) as info:
        catalog_spec("calogero", {"g9": 1.0})
    assert info.value.field == "system.params"
    with pytest.raises(ConfigError) as info:
        catalog_spec("noncentral", {"sigma": -1.0})
    assert info.value.field == "system.params"


def test_catalog_invariants_match_fit():
    spec = catalog_spec("calogero", {"sigma": 1.0})
    orbit = CalogeroOrbit.fit(CALOGERO, CALOGERO_STATE)
    assert orbit.H == hamiltonian(spec, CALOGERO_STATE)
    assert orbit.I == lrri(spec, CALOGERO_STATE)
