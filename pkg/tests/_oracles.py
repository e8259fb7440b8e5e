"""Reference implementations used as test oracles.

Nothing here imports the package: the RK4 stepper, the expression tree
walker and the finite-difference helpers are written from scratch so that
agreement with the package is evidence rather than tautology.
"""

from __future__ import annotations

import math
import random

import numpy as np


def rk4(fun, y0, t0: float, t1: float, h: float, sample_every: int = 1):
    """Classical fixed-step RK4; returns (times, states)."""
    n = max(1, int(round((t1 - t0) / h)))
    h = (t1 - t0) / n
    y = np.array(y0, dtype=float)
    t = t0
    ts, ys = [t], [y.copy()]
    for k in range(1, n + 1):
        k1 = fun(t, y)
        k2 = fun(t + h / 2, y + h / 2 * k1)
        k3 = fun(t + h / 2, y + h / 2 * k2)
        k4 = fun(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + k * h
        if k % sample_every == 0 or k == n:
            ts.append(t)
            ys.append(y.copy())
    return np.array(ts), np.array(ys)


def central_diff(f, v: float, h: float = 1e-6) -> float:
    return (f(v + h) - f(v - h)) / (2 * h)


def grad_fd(V, x: float, y: float, h: float = 1e-6) -> tuple[float, float]:
    return central_diff(lambda u: V(u, y), x, h), central_diff(lambda u: V(x, u), y, h)


# -- Cartesian reference potentials ---------------------------------------------

SQ3 = math.sqrt(3.0)


def calogero_V(x, y, sigma=1.0, g1=1.0, g2=1.0, g3=1.0, g4=0.0):
    v = 0.5 * sigma**2 * (x * x + y * y) + g1 / (2 * x * x)
    v += 2 * g2 / (x - SQ3 * y) ** 2 + 2 * g3 / (x + SQ3 * y) ** 2
    return v + g4 / (x * x + y * y)


def noncentral_V(x, y, sigma=2.0, g1=1.0, g2=0.5, g3=0.0):
    r = math.hypot(x, y)
    c, s2 = x / r, (y / r) ** 2
    return -sigma / r + (g1 + g2 * c) / (r * r * s2) + g3 / (r * r)


def hamiltonian_rhs(V, A=1.0, B=0.0, C=1.0, h: float = 1e-6):
    """Canonical equations with a finite-difference gradient of V(x, y)."""

    def fun(t, Y):
        x, y, px, py = Y
        vx, vy = grad_fd(V, x, y, h)
        return np.array([A * px + B * py, B * px + C * py, -vx, -vy])

    return fun


def calogero_rhs_exact(sigma=1.0, g1=1.0, g2=1.0, g3=1.0):
    """Hand-differentiated gradient of the Calogero potential (unit kinetic form)."""

    def fun(t, Y):
        x, y, px, py = Y
        u, w = x - SQ3 * y, x + SQ3 * y
        vx = sigma**2 * x - g1 / x**3 - 4 * g2 / u**3 - 4 * g3 / w**3
        vy = sigma**2 * y + 4 * SQ3 * g2 / u**3 - 4 * SQ3 * g3 / w**3
        return np.array([px, py, -vx, -vy])

    return fun


# -- expression oracle ----------------------------------------------------------

UNARY = ("sin", "cos", "tan", "asin", "atan", "sqrt", "exp", "log", "abs")
BINARY = ("+", "-", "*", "/", "^")
VARS = ("s", "q", "t", "x", "y", "u")


def random_tree(rng: random.Random, depth: int):
    """Nested tuples: ('num', v) | ('var', name) | ('neg', a) | (fn, a) | (op, a, b)."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return ("num", rng.choice([rng.randint(0, 9), round(rng.uniform(0, 5), rng.randint(0, 3))]))
        return ("var", rng.choice(VARS))
    r = rng.random()
    if r < 0.15:
        return ("neg", random_tree(rng, depth - 1))
    if r < 0.4:
        return (rng.choice(UNARY), random_tree(rng, depth - 1))
    return (rng.choice(BINARY), random_tree(rng, depth - 1), random_tree(rng, depth - 1))


def render(tree) -> str:
    """Fully parenthesized text with random spacing-free layout."""
    kind = tree[0]
    if kind == "num":
        return repr(tree[1]) if isinstance(tree[1], float) else str(tree[1])
    if kind == "var":
        return tree[1]
    if kind == "neg":
        return f"(-{render(tree[1])})"
    if kind in UNARY:
        return f"{kind}({render(tree[1])})"
    return f"({render(tree[1])}{kind}{render(tree[2])})"


class OracleDomainError(Exception):
    pass


def oracle_eval(tree, env) -> float:
    kind = tree[0]
    try:
        if kind == "num":
            return float(tree[1])
        if kind == "var":
            return float(env[tree[1]])
        if kind == "neg":
            return -oracle_eval(tree[1], env)
        if kind in UNARY:
            a = oracle_eval(tree[1], env)
            return abs(a) if kind == "abs" else getattr(math, kind)(a)
        a, b = oracle_eval(tree[1], env), oracle_eval(tree[2], env)
        if kind == "+":
            return a + b
        if kind == "-":
            return a - b
        if kind == "*":
            return a * b
        if kind == "/":
            return a / b
        return math.pow(a, b)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise OracleDomainError(str(exc)) from None


def same_float(a: float, b: float) -> bool:
    return (math.isnan(a) and math.isnan(b)) or a == b
