"""Exception hierarchy.

Every error raised deliberately by the package derives from :class:`ErmakovError`.
The CLI maps the three families below onto exit codes: configuration problems
(2), domain/guard trips (3) and tolerance violations (4).
"""

from __future__ import annotations


class ErmakovError(Exception):
    """Base class for all package errors."""


# -- configuration -----------------------------------------------------------


class ConfigError(ErmakovError):
    """Malformed run configuration. ``field`` names the offending entry."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class ExpressionSyntaxError(ConfigError):
    def __init__(self, message: str, text: str, line: int, column: int):
        self.text = text
        self.line = line
        self.column = column
        super().__init__(f"{message} at line {line}, column {column}")


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


# -- domain and guard errors -----------------------------------------------------


class DomainError(ErmakovError, ArithmeticError):
    """A function was evaluated outside the set where it is real and finite."""


class ExpressionDomainError(DomainError):
    """sqrt of a negative, log of a nonpositive, division by zero, ..."""


class SingularPointError(DomainError):
    """x = 0, y = 0 or q = 0 where the formulas divide by that quantity."""

    def __init__(self, message: str, variable: str | None = None):
        self.variable = variable
        super().__init__(message)


class SingularDirectionError(DomainError):
    """xi(s) = 0: the direction s = y/x is a null direction of the kinetic form."""

    def __init__(self, message: str, s: float | None = None):
        self.s = s
        super().__init__(message)


class ChartError(DomainError):
    """The (q, s) chart is undefined at the given state (x = 0)."""


class ReconstructionDomainError(DomainError):
    """q / xi(s) <= 0, so no Cartesian point maps to the given (q, s)."""


class RescalingDomainError(DomainError):
    """q touched zero or changed sign, so d tau = dt / q is not a valid clock."""


class NotIntegrableError(DomainError):
    """The quadrature pipeline needs a time-independent Lambda."""


class ForbiddenRegionError(DomainError):
    """The squared-velocity right-hand side is negative at the initial point."""


class NumericalRootError(DomainError):
    """A turning point was expected but could not be bracketed."""


class QuadratureDivergenceError(DomainError):
    """Numerical antiderivative failed to converge (e.g. the path crosses a pole)."""


class NoRealOrbitError(DomainError):
    """Closed-form parameters admit no real motion (negative radicand)."""


class ParameterInconsistencyError(DomainError):
    """Closed form evaluates outside its admissible range (e.g. |cos| > 1)."""


class SingularityApproachError(DomainError):
    """Adaptive step size collapsed; ``last_state`` holds the last good state."""

    def __init__(self, message: str, last_state=None):
        self.last_state = last_state
        super().__init__(message)


class StepBudgetError(ErmakovError):
    """``max_steps`` exceeded before reaching the requested end time."""

    def __init__(self, message: str, last_state=None):
        self.last_state = last_state
        super().__init__(message)


# -- tolerance checks ---------------------------------------------------------


class ToleranceViolation(ErmakovError):
    """A comparison or drift check exceeded its configured tolerance."""
