"""Arithmetic expressions over named real variables.

Users describe F, Lambda, omega, f and g as short formulas such as
``"(1+s^2)/2 * (1 + 4/(1-sqrt(3)*s)^2)"``. This module parses them into an
immutable tree, prints the tree back to canonical text, evaluates it, compiles it
to a Python function for the hot loops, and differentiates it symbolically so
potentials get exact gradients.

Grammar, loosest binding first::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?          # right-associative
    atom  := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .errors import ExpressionDomainError, ExpressionSyntaxError, UnknownIdentifierError

DEFAULT_VARIABLES = frozenset({"s", "q", "t", "x", "y", "u"})
CONSTANTS = {"pi": math.pi}
FUNCTIONS = ("sin", "cos", "tan", "asin", "atan", "sqrt", "exp", "log", "abs")


# -- guarded primitives (shared by the interpreter and compiled code) ---------


def _div(a: float, b: float) -> float:
    if b == 0.0:
        raise ExpressionDomainError("division by zero")
    return a / b


def _guard(name: str, fn: Callable[[float], float]) -> Callable[[float], float]:
    def wrapped(a: float) -> float:
        try:
            return fn(a)
        except (ValueError, OverflowError) as exc:
            raise ExpressionDomainError(f"{name}({a!r}) is undefined") from exc

    wrapped.__name__ = f"_{name}"
    return wrapped


def _pow(a: float, b: float) -> float:
    try:
        return math.pow(a, b)
    except (ValueError, OverflowError, ZeroDivisionError) as exc:
        raise ExpressionDomainError(f"{a!r}^{b!r} is undefined") from exc


_PRIMITIVES: dict[str, Callable[[float], float]] = {
    "sin": _guard("sin", math.sin),
    "cos": _guard("cos", math.cos),
    "tan": _guard("tan", math.tan),
    "asin": _guard("asin", math.asin),
    "atan": _guard("atan", math.atan),
    "sqrt": _guard("sqrt", math.sqrt),
    "exp": _guard("exp", math.exp),
    "log": _guard("log", math.log),
    "abs": abs,
}

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5
_BIN_PREC = {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}


def _format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


# -- tree ---------------------------------------------------------------------


class Expression:
    """Base node. Instances are immutable and hashable."""

    precedence = _PREC_ATOM

    def evaluate(self, env: Mapping[str, float] | None = None, **kwargs: float) -> float:
        values = dict(env or {}, **kwargs)
        return self._eval(values)

    def _eval(self, env: Mapping[str, float]) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def _code(self) -> str:  # pragma: no cover - abstract
        raise NotImplementedError

    def diff(self, var: str) -> "Expression":  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(self._vars())

    def _vars(self) -> Iterable[str]:
        return ()

    def compile(self, args: Iterable[str] = ("s",)) -> Callable[..., float]:
        """Return a plain Python function of ``args`` computing this expression.

        The generated code calls the same guarded primitives as :meth:`evaluate`,
        so both paths give bit-identical results.
        """
        args = tuple(args)
        missing = self.variables - set(args)
        if missing:
            raise UnknownIdentifierError(
                f"variable(s) {sorted(missing)} not among arguments {list(args)}", str(self), 1, 1
            )
        src = f"def _compiled({', '.join(args)}):\n    return {self._code()}\n"
        namespace: dict[str, object] = {"_div": _div, "_pow": _pow}
        namespace.update({f"_{k}": v for k, v in _PRIMITIVES.items()})
        exec(compile(src, f"<expr {str(self)[:60]}>", "exec"), namespace)
        fn = namespace["_compiled"]
        fn.expression = self  # type: ignore[attr-defined]
        return fn  # type: ignore[return-value]

    def __str__(self) -> str:
        return self._print()

    def _print(self) -> str:  # pragma: no cover - abstract
        raise NotImplementedError

    def _wrapped(self, min_prec: int) -> str:
        text = self._print()
        return f"({text})" if self.precedence < min_prec else text


@dataclass(frozen=True)
class Num(Expression):
    value: float

    def _eval(self, env):
        return self.value

    def _code(self):
        return repr(float(self.value))

    def diff(self, var):
        return ZERO

    def _print(self):
        return _format_number(self.value)


@dataclass(frozen=True)
class Var(Expression):
    name: str

    def _eval(self, env):
        try:
            return float(env[self.name])
        except KeyError:
            raise UnknownIdentifierError(f"no value bound to {self.name!r}", self.name, 1, 1) from None

    def _code(self):
        return self.name

    def diff(self, var):
        return ONE if var == self.name else ZERO

    def _vars(self):
        return (self.name,)

    def _print(self):
        return self.name


@dataclass(frozen=True)
class Neg(Expression):
    arg: Expression
    precedence = _PREC_NEG

    def _eval(self, env):
        return -self.arg._eval(env)

    def _code(self):
        return f"(-{self.arg._code()})"

    def diff(self, var):
        return neg(self.arg.diff(var))

    def _vars(self):
        return self.arg._vars()

    def _print(self):
        return "-" + self.arg._wrapped(_PREC_NEG)


@dataclass(frozen=True)
class Call(Expression):
    fn: str
    arg: Expression

    def _eval(self, env):
        return _PRIMITIVES[self.fn](self.arg._eval(env))

    def _code(self):
        return f"_{self.fn}({self.arg._code()})"

    def diff(self, var):
        u = self.arg
        du = u.diff(var)
        if du == ZERO:
            return ZERO
        fn = self.fn
        if fn == "sin":
            outer = Call("cos", u)
        elif fn == "cos":
            outer = neg(Call("sin", u))
        elif fn == "tan":
            outer = div(ONE, power(Call("cos", u), TWO))
        elif fn == "asin":
            outer = div(ONE, Call("sqrt", sub(ONE, power(u, TWO))))
        elif fn == "atan":
            outer = div(ONE, add(ONE, power(u, TWO)))
        elif fn == "sqrt":
            outer = div(ONE, mul(TWO, self))
        elif fn == "exp":
            outer = self
        elif fn == "log":
            outer = div(ONE, u)
        else:  # abs
            outer = div(u, self)
        return mul(outer, du)

    def _vars(self):
        return self.arg._vars()

    def _print(self):
        return f"{self.fn}({self.arg._print()})"


@dataclass(frozen=True)
class BinOp(Expression):
    op: str
    left: Expression
    right: Expression

    @property
    def precedence(self):  # type: ignore[override]
        return _BIN_PREC[self.op]

    def _eval(self, env):
        a = self.left._eval(env)
        b = self.right._eval(env)
        op = self.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return _div(a, b)
        return _pow(a, b)

    def _code(self):
        a, b = self.left._code(), self.right._code()
        if self.op == "/":
            return f"_div({a}, {b})"
        if self.op == "^":
            return f"_pow({a}, {b})"
        return f"({a} {self.op} {b})"

    def diff(self, var):
        u, v = self.left, self.right
        du, dv = u.diff(var), v.diff(var)
        op = self.op
        if op == "+":
            return add(du, dv)
        if op == "-":
            return sub(du, dv)
        if op == "*":
            return add(mul(du, v), mul(u, dv))
        if op == "/":
            return div(sub(mul(du, v), mul(u, dv)), power(v, TWO))
        # power
        if dv == ZERO:
            return mul(mul(v, power(u, sub(v, ONE))), du)
        return mul(self, add(mul(dv, Call("log", u)), div(mul(v, du), u)))

    def _vars(self):
        yield from self.left._vars()
        yield from self.right._vars()

    def _print(self):
        prec = self.precedence
        if self.op == "^":
            left = self.left._wrapped(_PREC_ATOM)
            right = self.right._wrapped(_PREC_NEG)
            return f"{left}^{right}"
        left = self.left._wrapped(prec)
        right = self.right._wrapped(prec + 1)
        if self.op in "+-":
            return f"{left} {self.op} {right}"
        return f"{left}{self.op}{right}"


ZERO = Num(0.0)
ONE = Num(1.0)
TWO = Num(2.0)


# -- simplifying constructors (used by diff) ----------------------------------


def num(value: float) -> Expression:
    value = float(value)
    return Neg(Num(-value)) if value < 0 else Num(value)


def _const(e: Expression) -> float | None:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Neg) and isinstance(e.arg, Num):
        return -e.arg.value
    return None


def neg(a: Expression) -> Expression:
    c = _const(a)
    if c is not None:
        return num(-c)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Expression, b: Expression) -> Expression:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return num(ca + cb)
    if ca == 0.0:
        return b
    if cb == 0.0:
        return a
    return BinOp("+", a, b)


def sub(a: Expression, b: Expression) -> Expression:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return num(ca - cb)
    if cb == 0.0:
        return a
    if ca == 0.0:
        return neg(b)
    return BinOp("-", a, b)


def mul(a: Expression, b: Expression) -> Expression:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return num(ca * cb)
    if ca == 0.0 or cb == 0.0:
        return ZERO
    if ca == 1.0:
        return b
    if cb == 1.0:
        return a
    if ca == -1.0:
        return neg(b)
    if cb == -1.0:
        return neg(a)
    return BinOp("*", a, b)


def div(a: Expression, b: Expression) -> Expression:
    ca, cb = _const(a), _const(b)
    if cb == 1.0:
        return a
    if ca == 0.0:
        return ZERO
    if ca is not None and cb is not None and cb != 0.0:
        return num(ca / cb)
    return BinOp("/", a, b)


def power(a: Expression, b: Expression) -> Expression:
    cb = _const(b)
    if cb == 1.0:
        return a
    if cb == 0.0:
        return ONE
    return BinOp("^", a, b)


# -- tokenizer and parser --------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # num, name, op, end
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(
                f"unexpected character {text[pos]!r}", text, line, pos - line_start + 1
            )
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            for i, ch in enumerate(chunk):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        else:
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(_Token("end", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: frozenset[str]):
        self.text = text
        self.variables = variables
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def fail(self, message: str, tok: _Token | None = None, cls=ExpressionSyntaxError):
        tok = tok or self.tok
        raise cls(message, self.text, tok.line, tok.column)

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind != "op":
            found = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            self.fail(f"expected {text!r}, found {found}")
        self.i += 1

    def parse(self) -> Expression:
        e = self.expr()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> Expression:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expression:
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expression:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.i += 1
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            if self.tok.kind == "op" and self.tok.text == "(":
                if tok.text not in FUNCTIONS:
                    self.fail(f"unknown function {tok.text!r}", tok, UnknownIdentifierError)
                self.i += 1
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text in self.variables:
                return Var(tok.text)
            if tok.text in CONSTANTS:
                return Num(CONSTANTS[tok.text])
            if tok.text in FUNCTIONS:
                self.fail(f"function {tok.text!r} needs an argument", tok)
            self.fail(f"unknown variable {tok.text!r}", tok, UnknownIdentifierError)
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected {tok.text!r}")


def parse_expression(text: str, variables: Iterable[str] = DEFAULT_VARIABLES) -> Expression:
    """Parse ``text`` into an :class:`Expression`.

    Identifiers must be one of ``variables``, a function name applied to a
    parenthesised argument, or the constant ``pi``. Errors carry 1-based line and
    column of the offending token.

    >>> parse_expression("q/2").evaluate(q=4.0)
    2.0
    """
    return _Parser(text, frozenset(variables)).parse()


def as_expression(value: "str | float | Expression", variables: Iterable[str] = DEFAULT_VARIABLES) -> Expression:
    if isinstance(value, Expression):
        return value
    if isinstance(value, (int, float)):
        return num(value)
    return parse_expression(value, variables)
