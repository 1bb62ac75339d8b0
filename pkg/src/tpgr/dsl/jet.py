"""Second-order jets: a value, its 4 first partials and 10 second partials.

A jet is carried as a flat sequence of 15 floats::

    [value, d0, d1, d2, d3, h00, h01, h02, h03, h11, h12, h13, h22, h23, h33]

The Hessian is stored as the upper triangle, so symmetry holds by
construction. The list-level primitives below are what the pure-Python tape
evaluator runs; :class:`Jet2` wraps them with operator overloading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .spec import SLOTS, sym_index

JET_SIZE = 15
_PAIRS = tuple(SLOTS)


def unary(a: Sequence[float], f0: float, f1: float, f2: float) -> list[float]:
    """Chain rule for phi(a) given phi, phi', phi'' evaluated at a's value."""
    g = a[1:5]
    out = [f0, f1 * g[0], f1 * g[1], f1 * g[2], f1 * g[3]]
    for k, (i, j) in enumerate(_PAIRS):
        out.append(f2 * g[i] * g[j] + f1 * a[5 + k])
    return out


def add(a, b) -> list[float]:
    return [x + y for x, y in zip(a, b)]


def sub(a, b) -> list[float]:
    return [x - y for x, y in zip(a, b)]


def negate(a) -> list[float]:
    return [-x for x in a]


def mul(a, b) -> list[float]:
    av, bv = a[0], b[0]
    ga, gb = a[1:5], b[1:5]
    out = [av * bv]
    for i in range(4):
        out.append(av * gb[i] + bv * ga[i])
    for k, (i, j) in enumerate(_PAIRS):
        out.append(av * b[5 + k] + bv * a[5 + k] + (ga[i] * gb[j] + ga[j] * gb[i]))
    return out


def reciprocal(b) -> list[float]:
    x = b[0]
    r = 1.0 / x
    return unary(b, r, -r * r, 2.0 * r * r * r)


def div(a, b) -> list[float]:
    return mul(a, reciprocal(b))


def power_derivs(x: float, p: float) -> tuple[float, float, float]:
    """x**p and its first two derivatives; the caller has checked the domain."""
    if p == 0.0:
        return 1.0, 0.0, 0.0
    if p == 1.0:
        return x, 1.0, 0.0
    if p == 2.0:
        return x * x, 2.0 * x, 2.0
    return math.pow(x, p), p * math.pow(x, p - 1.0), p * (p - 1.0) * math.pow(x, p - 2.0)


def constant(c: float) -> list[float]:
    return [c] + [0.0] * 14


def variable(value: float, index: int) -> list[float]:
    out = [value] + [0.0] * 14
    out[1 + index] = 1.0
    return out


@dataclass(frozen=True)
class Jet2:
    """Value with exact first and second partial derivatives at a point."""

    value: float
    grad: tuple[float, float, float, float]
    hess: tuple[float, ...]  # upper triangle, 10 entries

    @classmethod
    def from_list(cls, data: Sequence[float]) -> "Jet2":
        return cls(float(data[0]), tuple(float(x) for x in data[1:5]),
                   tuple(float(x) for x in data[5:15]))

    @classmethod
    def const(cls, c: float) -> "Jet2":
        return cls.from_list(constant(float(c)))

    @classmethod
    def var(cls, value: float, index: int) -> "Jet2":
        return cls.from_list(variable(float(value), index))

    def to_list(self) -> list[float]:
        return [self.value, *self.grad, *self.hess]

    def d2(self, i: int, j: int) -> float:
        return self.hess[sym_index(i, j)]

    def hessian(self):
        import numpy as np

        h = np.empty((4, 4))
        for k, (i, j) in enumerate(_PAIRS):
            h[i, j] = h[j, i] = self.hess[k]
        return h

    def _coerce(self, other) -> "Jet2":
        return other if isinstance(other, Jet2) else Jet2.const(float(other))

    def __add__(self, o):
        return Jet2.from_list(add(self.to_list(), self._coerce(o).to_list()))

    __radd__ = __add__

    def __sub__(self, o):
        return Jet2.from_list(sub(self.to_list(), self._coerce(o).to_list()))

    def __rsub__(self, o):
        return self._coerce(o) - self

    def __mul__(self, o):
        return Jet2.from_list(mul(self.to_list(), self._coerce(o).to_list()))

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._coerce(o)
        if o.value == 0.0:
            raise ZeroDivisionError("jet division by zero")
        return Jet2.from_list(div(self.to_list(), o.to_list()))

    def __rtruediv__(self, o):
        return self._coerce(o) / self

    def __neg__(self):
        return Jet2.from_list(negate(self.to_list()))

    def __pow__(self, p: float):
        if isinstance(p, Jet2):
            raise TypeError("jet exponents must be constants")
        p = float(p)
        x = self.value
        if (p != int(p) and x <= 0.0) or (p < 0 and x == 0.0):
            raise ValueError(f"{x!r} ** {p!r} outside the differentiable domain")
        return Jet2.from_list(unary(self.to_list(), *power_derivs(x, p)))


DOMAIN_MESSAGES = {
    1: "division by zero",
    2: "ln of nonpositive value",
    3: "abs at 0",
    4: "sqrt of nonpositive value",
    5: "asin argument outside (-1, 1)",
    6: "power outside its domain",
    7: "tan pole",
    8: "non-finite value",
}


def fn_derivs(fn: str, x: float):
    """(phi, phi', phi'') at x, or an int error code from DOMAIN_MESSAGES."""
    if fn == "sin":
        s, c = math.sin(x), math.cos(x)
        return s, c, -s
    if fn == "cos":
        s, c = math.sin(x), math.cos(x)
        return c, -s, -c
    if fn == "tan":
        c = math.cos(x)
        if c == 0.0:
            return 7
        t = math.tan(x)
        sec2 = 1.0 + t * t
        return t, sec2, 2.0 * t * sec2
    if fn == "asin":
        if not -1.0 < x < 1.0:
            return 5
        w = 1.0 - x * x
        r = 1.0 / math.sqrt(w)
        return math.asin(x), r, x * r / w
    if fn == "exp":
        e = math.exp(x)
        return e, e, e
    if fn == "ln":
        if not x > 0.0:
            return 2
        return math.log(x), 1.0 / x, -1.0 / (x * x)
    if fn == "abs":
        if x == 0.0:
            return 3
        return (x, 1.0, 0.0) if x > 0.0 else (-x, -1.0, 0.0)
    if fn == "sqrt":
        if not x > 0.0:
            return 4
        s = math.sqrt(x)
        return s, 0.5 / s, -0.25 / (x * s)
    raise ValueError(f"unknown function '{fn}'")


def apply(fn: str, a: Jet2) -> Jet2:
    """Apply a named unary function to a jet."""
    if fn == "neg":
        return -a
    f = fn_derivs(fn, a.value)
    if isinstance(f, int):
        raise ValueError(DOMAIN_MESSAGES[f])
    return Jet2.from_list(unary(a.to_list(), *f))


def sin(a: Jet2) -> Jet2:
    return apply("sin", a)


def cos(a: Jet2) -> Jet2:
    return apply("cos", a)


def tan(a: Jet2) -> Jet2:
    return apply("tan", a)


def asin(a: Jet2) -> Jet2:
    return apply("asin", a)


def exp(a: Jet2) -> Jet2:
    return apply("exp", a)


def ln(a: Jet2) -> Jet2:
    return apply("ln", a)


def sqrt(a: Jet2) -> Jet2:
    return apply("sqrt", a)
