"""Hamiltonian Ermakov-Lewis-Ray-Reid systems.

Build admissible Hamiltonians ``H = (A px^2 + 2B px py + C py^2)/2 + V`` whose
flow carries the Lewis-Ray-Reid invariant, integrate them with invariant
monitoring, reduce autonomous ones to separable quadratures and compare
against the closed-form Calogero and noncentral orbits.
"""

from types import ModuleType as _ModuleType

from .core import (
    ElrrSystem,
    GenericElrrSystem,
    HamiltonianSpec,
    PhaseState,
    admissible_frequency,
    canonical_rhs,
    constraint_residual,
    hamiltonian,
    induced_fbar_gbar,
    lrri,
    potential,
    potential_gradient,
    reduce_system,
)
from .errors import (
    ConfigError,
    DomainError,
    ErmakovError,
    ExpressionSyntaxError,
    ToleranceViolation,
)
from .expression import Expression, parse_expression
from .integrators import DriftReport, IntegratorConfig, Trajectory, drift_report, integrate, integrate_elrr
from .models import (
    CATALOG,
    CalogeroOrbit,
    CalogeroParams,
    NoncentralOrbit,
    NoncentralParams,
    calogero_q_closed,
    calogero_s_closed,
    calogero_spec,
    catalog_spec,
    chi_bounds,
    jacobi_transform,
    literature_case,
    noncentral_costheta_closed,
    noncentral_r_closed,
    noncentral_spec,
)
from .quadrature import (
    QsState,
    QuadratureSolution,
    from_qs,
    quadrature_pipeline,
    rescale_time,
    shift_lambda,
    solve_separable_q,
    solve_separable_s,
    to_qs,
)

__version__ = "0.1.0"

__all__ = sorted(
    name for name, obj in globals().items()
    if not name.startswith("_") and not isinstance(obj, _ModuleType)
)
