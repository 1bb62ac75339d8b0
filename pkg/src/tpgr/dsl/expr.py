"""Expression trees for metric components.

Nodes are frozen dataclasses, so structural equality is plain ``==``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

import numpy as np

from ..errors import DomainError

FUNCTIONS = ("sin", "cos", "tan", "asin", "exp", "ln", "abs", "sqrt", "neg")
BINARY_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class Const:
    value: float
    symbol: str | None = field(default=None, compare=True)


@dataclass(frozen=True)
class Coord:
    index: int
    name: str


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Unary:
    fn: str
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Coord, Param, Unary, Binary]

ZERO = Const(0.0)


def is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0.0 and e.symbol is None


# -- construction helpers (used by the catalog to build metrics in code) -----

def const(v: float) -> Const:
    return Const(float(v))


def add(a: Expr, b: Expr) -> Expr:
    return Binary("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    return Binary("-", a, b)


def mul(*factors: Expr) -> Expr:
    out = factors[0]
    for f in factors[1:]:
        out = Binary("*", out, f)
    return out


def div(a: Expr, b: Expr) -> Expr:
    return Binary("/", a, b)


def power(a: Expr, p: float) -> Expr:
    return Binary("^", a, Const(float(p)))


def neg(a: Expr) -> Expr:
    return Unary("neg", a)


def call(fn: str, a: Expr) -> Expr:
    if fn not in FUNCTIONS:
        raise ValueError(f"unknown function '{fn}'")
    return Unary(fn, a)


# -- traversal ---------------------------------------------------------------

def walk(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, Unary):
        yield from walk(e.arg)
    elif isinstance(e, Binary):
        yield from walk(e.left)
        yield from walk(e.right)


def params_used(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Param)}


def coords_used(e: Expr) -> set[int]:
    return {n.index for n in walk(e) if isinstance(n, Coord)}


def size(e: Expr) -> int:
    return sum(1 for _ in walk(e))


# -- serialization -----------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_ATOM = 5


def _format_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _prec(e: Expr) -> int:
    if isinstance(e, Const):
        return 3 if (e.symbol is None and math.copysign(1.0, e.value) < 0) else _ATOM
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) and e.fn == "neg":
        return 3
    return _ATOM


def to_source(e: Expr) -> str:
    """Render ``e`` in the document expression syntax with minimal parentheses.

    The output reparses to a structurally identical tree.
    """
    if isinstance(e, Const):
        if e.symbol is not None:
            return e.symbol
        if math.copysign(1.0, e.value) < 0:
            return "-" + _format_number(-e.value)
        return _format_number(e.value)
    if isinstance(e, Coord):
        return e.name
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Unary):
        if e.fn != "neg":
            return f"{e.fn}({to_source(e.arg)})"
        inner = to_source(e.arg)
        a = e.arg
        # a bare nonnegative literal after '-' would be folded into a constant
        bare_literal = isinstance(a, Const) and a.symbol is None and _prec(a) == _ATOM
        if _prec(a) < 3 or bare_literal:
            inner = f"({inner})"
        return "-" + inner
    op = e.op
    p = _PREC[op]
    left = to_source(e.left)
    right = to_source(e.right)
    if op == "^":
        if _prec(e.left) < _ATOM:
            left = f"({left})"
        return f"{left}^{right}"
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    if op in "+-":
        return f"{left} {op} {right}"
    return f"{left}{op}{right}"


# -- vectorized value evaluation ---------------------------------------------
# Values only, no derivatives: this is the route the finite-difference oracle
# uses, kept separate from the jet tape.

def evaluate_values(e: Expr, points: np.ndarray, params: Mapping[str, float]) -> np.ndarray:
    """Evaluate ``e`` at each row of ``points`` (shape (N, 4))."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return _eval_np(e, pts, params)


def _fail(msg: str, node: Expr, pts: np.ndarray, bad: np.ndarray):
    i = int(np.flatnonzero(bad)[0])
    raise DomainError(msg, subexpr=to_source(node), point=pts[i])


def _eval_np(e: Expr, pts: np.ndarray, params: Mapping[str, float]) -> np.ndarray:
    n = pts.shape[0]
    if isinstance(e, Const):
        return np.full(n, e.value)
    if isinstance(e, Coord):
        return pts[:, e.index].copy()
    if isinstance(e, Param):
        return np.full(n, float(params[e.name]))
    if isinstance(e, Unary):
        a = _eval_np(e.arg, pts, params)
        fn = e.fn
        if fn == "neg":
            return -a
        if fn == "sin":
            return np.sin(a)
        if fn == "cos":
            return np.cos(a)
        if fn == "exp":
            with np.errstate(over="ignore"):
                out = np.exp(a)
        elif fn == "tan":
            bad = np.cos(a) == 0.0
            if bad.any():
                _fail("tan pole", e, pts, bad)
            out = np.tan(a)
        elif fn == "asin":
            bad = ~(np.abs(a) < 1.0)
            if bad.any():
                _fail("asin argument outside (-1, 1)", e, pts, bad)
            out = np.arcsin(a)
        elif fn == "ln":
            bad = ~(a > 0.0)
            if bad.any():
                _fail("ln of nonpositive value", e, pts, bad)
            out = np.log(a)
        elif fn == "abs":
            bad = a == 0.0
            if bad.any():
                _fail("abs at 0", e, pts, bad)
            out = np.abs(a)
        elif fn == "sqrt":
            bad = ~(a > 0.0)
            if bad.any():
                _fail("sqrt of nonpositive value", e, pts, bad)
            out = np.sqrt(a)
        else:  # pragma: no cover - parser rejects unknown names
            raise ValueError(fn)
        bad = ~np.isfinite(out)
        if bad.any():
            _fail("non-finite value", e, pts, bad)
        return out
    a = _eval_np(e.left, pts, params)
    if e.op == "^":
        p = e.right.value
        if p == int(p):
            bad = (a == 0.0) if p < 0 else np.zeros(n, bool)
        else:
            bad = ~(a > 0.0)
        if bad.any():
            _fail("power outside its domain", e, pts, bad)
        return a ** p
    b = _eval_np(e.right, pts, params)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    bad = b == 0.0
    if bad.any():
        _fail("division by zero", e, pts, bad)
    return a / b
