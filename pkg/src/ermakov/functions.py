"""Real functions with an attached first derivative.

A :class:`RealFunction` wraps a callable ``f(v, *rest)`` together with
``df/dv`` (the derivative with respect to the *first* argument). When no
analytic derivative is known it falls back to a central difference with step
``h = 1e-6 * max(1, |v|)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

from scipy import integrate

from .errors import QuadratureDivergenceError
from .expression import Expression, as_expression

FD_REL_STEP = 1e-6


def central_difference(fn: Callable[..., float], v: float, *rest: float) -> float:
    h = FD_REL_STEP * max(1.0, abs(v))
    return (fn(v + h, *rest) - fn(v - h, *rest)) / (2.0 * h)


@dataclass(frozen=True)
class RealFunction:
    func: Callable[..., float]
    deriv: Callable[..., float] | None = None
    label: str = ""
    expression: Expression | None = field(default=None, compare=False)
    args: tuple[str, ...] = field(default=("s",), compare=False)

    def __call__(self, v: float, *rest: float) -> float:
        return self.func(v, *rest)

    def derivative(self, v: float, *rest: float) -> float:
        if self.deriv is not None:
            return self.deriv(v, *rest)
        return central_difference(self.func, v, *rest)

    @property
    def analytic(self) -> bool:
        return self.deriv is not None

    def derivative_function(self) -> "RealFunction":
        """The derivative as a RealFunction (its own derivative is symbolic when possible)."""
        if self.expression is not None:
            return _from_expr(self.expression.diff(self.args[0]), self.args)
        return RealFunction(self.derivative, None, f"d({self.label})", args=self.args)

    @classmethod
    def from_expression(cls, expr: "str | float | Expression", args: Sequence[str] = ("s",)) -> "RealFunction":
        """Compile ``expr`` as a function of ``args``; the derivative is taken
        symbolically with respect to ``args[0]``."""
        return _from_expr(as_expression(expr, args), tuple(args))

    @classmethod
    def constant(cls, value: float, args: Sequence[str] = ("s",)) -> "RealFunction":
        return cls.from_expression(float(value), args)


def _from_expr(expr: Expression, args: tuple[str, ...]) -> RealFunction:
    fn = expr.compile(args)
    dfn = expr.diff(args[0]).compile(args)
    return RealFunction(fn, dfn, str(expr), expr, args)


def numerical_antiderivative(F: Callable[[float], float], lower: float) -> Callable[[float], float]:
    """``s -> integral of F from lower to s`` by adaptive Gauss-Kronrod quadrature.

    Quadrature warnings (divergence, roundoff) are raised as
    :class:`QuadratureDivergenceError`; they typically mean the path from
    ``lower`` to ``s`` crosses a singularity of F.
    """

    def integral(s: float) -> float:
        if s == lower:
            return 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                value, _ = integrate.quad(F, lower, s, epsabs=1e-14, epsrel=1e-13, limit=200)
            except integrate.IntegrationWarning as exc:
                raise QuadratureDivergenceError(f"integral of F from {lower!r} to {s!r}: {exc}") from None
        return value

    return integral
