"""scikit-learn style wrappers around the solvers.

State arrays have one row per state with columns ``(t, x, y, px, py)``;
time arrays are 1-d. ``fit`` takes the initial state (a single row), fitted
attributes end in an underscore and ``predict(T)`` returns rows at times T.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import HamiltonianSpec, PhaseState
from .integrators import ADAPTIVE, IntegratorConfig, drift_report, integrate
from .models import CalogeroOrbit, CalogeroParams, NoncentralOrbit, NoncentralParams
from .quadrature import QsState, from_qs, quadrature_pipeline, to_qs

STATE_COLUMNS = ("t", "x", "y", "px", "py")


def check_states(X) -> np.ndarray:
    """2-d float array with the five state columns, all finite."""
    X = check_array(X, ensure_2d=False, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != len(STATE_COLUMNS):
        raise ValueError(f"expected {len(STATE_COLUMNS)} columns {STATE_COLUMNS}, got {X.shape[1]}")
    return X


def check_initial_state(X) -> PhaseState:
    X = check_states(X)
    if X.shape[0] != 1:
        raise ValueError(f"expected a single initial state, got {X.shape[0]} rows")
    return PhaseState(*X[0])


def check_times(T) -> np.ndarray:
    T = check_array(np.atleast_1d(np.asarray(T, dtype=float)), ensure_2d=False, dtype=float)
    if T.ndim != 1:
        raise ValueError("times must be a 1-d array")
    return T


def check_spec(spec) -> HamiltonianSpec:
    if not isinstance(spec, HamiltonianSpec):
        raise TypeError(f"spec must be a HamiltonianSpec, got {type(spec).__name__}")
    return spec


class QsTransformer(TransformerMixin, BaseEstimator):
    """Cartesian states <-> ``(q, s, p_q, p_s, sign_x)`` rows."""

    def __init__(self, spec: HamiltonianSpec | None = None):
        self.spec = spec

    def fit(self, X, y=None):
        check_spec(self.spec)
        self.n_features_in_ = check_states(X).shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        out = []
        for row in check_states(X):
            qs = to_qs(self.spec, PhaseState(*row))
            out.append((qs.q, qs.s, qs.p_q, qs.p_s, qs.sign_x))
        return np.array(out)

    def inverse_transform(self, Z):
        check_is_fitted(self, "n_features_in_")
        Z = check_array(Z, dtype=float)
        if Z.shape[1] != 5:
            raise ValueError("expected columns (q, s, p_q, p_s, sign_x)")
        return np.array([
            from_qs(self.spec, QsState(q, s, pq, ps, 1 if sx >= 0 else -1)).as_array()
            for q, s, pq, ps, sx in Z
        ])


class HamiltonianIntegrator(BaseEstimator):
    """Direct integration from one initial state. ``predict`` uses the dense
    output of the adaptive scheme, or linear interpolation of the recorded
    samples for the symplectic one."""

    def __init__(self, spec: HamiltonianSpec | None = None, t_end: float = 10.0, method: str = ADAPTIVE,
                 abs_tol: float = 1e-10, rel_tol: float = 1e-10, step: float = 1e-3,
                 symplectic_order: int = 2):
        self.spec = spec
        self.t_end = t_end
        self.method = method
        self.abs_tol = abs_tol
        self.rel_tol = rel_tol
        self.step = step
        self.symplectic_order = symplectic_order

    def fit(self, X, y=None):
        spec = check_spec(self.spec)
        initial = check_initial_state(X)
        cfg = IntegratorConfig(self.method, self.abs_tol, self.rel_tol, self.step,
                               symplectic_order=self.symplectic_order)
        self.trajectory_ = integrate(spec, initial, self.t_end, cfg, keep_dense=self.method == ADAPTIVE)
        self.drift_ = drift_report(self.trajectory_)
        return self

    def predict(self, T):
        check_is_fitted(self, "trajectory_")
        T = check_times(T)
        tr = self.trajectory_
        if tr.dense is not None:
            return tr.sample(T)
        cols = (tr.x, tr.y, tr.px, tr.py)
        return np.column_stack([np.interp(T, tr.t, c) for c in cols])


class QuadratureSolver(BaseEstimator):
    """Separable-quadrature solution of an autonomous spec."""

    def __init__(self, spec: HamiltonianSpec | None = None, t_end: float = 10.0, num: int = 1001):
        self.spec = spec
        self.t_end = t_end
        self.num = num

    def fit(self, X, y=None):
        self.solution_ = quadrature_pipeline(check_spec(self.spec), check_initial_state(X),
                                             self.t_end, self.num)
        self.H_, self.I_ = self.solution_.H, self.solution_.I
        return self

    def predict(self, T):
        check_is_fitted(self, "solution_")
        return self.solution_.states_at(check_times(T))


class CalogeroClosedForm(BaseEstimator):
    """Closed-form ``(q, s)`` of the equal-coupling Calogero system."""

    def __init__(self, sigma: float = 1.0, g: float = 1.0, g4: float = 0.0):
        self.sigma = sigma
        self.g = g
        self.g4 = g4

    def fit(self, X, y=None):
        params = CalogeroParams(self.sigma, self.g, self.g, self.g, self.g4)
        self.orbit_ = CalogeroOrbit.fit(params, check_initial_state(X))
        o = self.orbit_
        self.H_, self.I_, self.c1_, self.c2_, self.sector_ = o.H, o.I, o.c1, o.c2, o.sector
        return self

    def predict(self, T):
        check_is_fitted(self, "orbit_")
        T = check_times(T)
        return np.column_stack([self.orbit_.q_at(T), self.orbit_.s_at(T)])


class NoncentralClosedForm(BaseEstimator):
    """Closed-form ``(r, cos(theta))`` of bounded noncentral motion."""

    def __init__(self, sigma: float = 2.0, g1: float = 1.0, g2: float = 0.5, g3: float = 0.0,
                 chart: int = 1):
        self.sigma = sigma
        self.g1 = g1
        self.g2 = g2
        self.g3 = g3
        self.chart = chart

    def fit(self, X, y=None):
        params = NoncentralParams(self.sigma, self.g1, self.g2, self.g3, self.chart)
        self.orbit_ = NoncentralOrbit.fit(params, check_initial_state(X))
        o = self.orbit_
        self.H_, self.I_, self.c1_, self.c2_ = o.H, o.I, o.c1, o.c2
        return self

    def predict(self, T):
        check_is_fitted(self, "orbit_")
        T = check_times(T)
        return np.column_stack([self.orbit_.r_at(T), self.orbit_.costheta_at(T)])
