"""Line-oriented ``.gmet`` metric documents.

Grammar (one statement per line, ``#`` starts a comment)::

    chart <c0> <c1> <c2> <c3>          first statement
    metric <name>                      optional label
    param <name> = <real>
    domain <coord> (lo, hi)            brackets may be [ ] for closed ends
    g<i><j> = <expression>             i <= j; omitted slots are 0

Expressions: ``+ -`` < ``* /`` < unary ``-`` < ``^``; function calls
``f(e)``; the constant ``pi``. Exponents must be rational constants.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from ..errors import MetricSyntaxError
from .expr import (FUNCTIONS, ZERO, Binary, Const, Coord, Expr, Param, Unary,
                   to_source, walk)
from .spec import SLOTS, Chart, Interval, MetricSpec, sym_index

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),=\[\]])
""", re.VERBOSE)

_SLOT_RE = re.compile(r"^g([0-9])([0-9])$")
_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_.-]*$")
_MAX_EXPONENT_DENOMINATOR = 8
_KEYWORDS = {"chart", "param", "domain", "metric", "pi", "inf"}


@dataclass
class _Tok:
    kind: str  # num, ident, op, end
    text: str
    col: int  # 1-based


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(line):
        if line[pos] == "#":
            break
        m = _TOKEN.match(line, pos)
        if m is None:
            raise MetricSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos + 1))
        pos = m.end()
    toks.append(_Tok("end", "", len(line.rstrip("\n")) + 1))
    return toks


class _ExprParser:
    """Precedence-climbing parser for one expression."""

    def __init__(self, toks, lineno, coords, params, allow_coords=True):
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.coords = coords
        self.params = params
        self.allow_coords = allow_coords

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: _Tok):
        raise MetricSyntaxError(msg, self.lineno, tok.col)

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text or t.kind not in ("op",):
            found = "end of line" if t.kind == "end" else repr(t.text)
            self.error(f"expected '{text}', found {found}", t)
        return self.next()

    def parse_expr(self) -> Expr:
        left = self.parse_term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            left = Binary(op, left, self.parse_term())
        return left

    def parse_term(self) -> Expr:
        left = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next().text
            left = Binary(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.next()
            nxt, after = self.peek(), self.peek(1)
            if nxt.kind == "num" and not (after.kind == "op" and after.text == "^"):
                self.next()
                return Const(-float(nxt.text))
            return Unary("neg", self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        t = self.peek()
        if t.kind == "op" and t.text == "^":
            self.next()
            start = self.peek()
            exponent = self.parse_unary()
            return Binary("^", base, Const(self._rational_exponent(exponent, start)))
        return base

    def _rational_exponent(self, e: Expr, tok: _Tok) -> float:
        if any(isinstance(n, (Coord, Param)) for n in walk(e)):
            self.error("exponent must be a constant", tok)
        try:
            v = float(_const_value(e))
        except (ArithmeticError, ValueError):
            self.error("exponent does not evaluate to a real constant", tok)
        if not math.isfinite(v):
            self.error("exponent is not finite", tok)
        frac = Fraction(v).limit_denominator(_MAX_EXPONENT_DENOMINATOR)
        if abs(float(frac) - v) > 1e-12:
            self.error(f"exponent {v!r} is not a rational with denominator <= "
                       f"{_MAX_EXPONENT_DENOMINATOR}", tok)
        return float(frac)

    def parse_atom(self) -> Expr:
        t = self.next()
        if t.kind == "num":
            return Const(float(t.text))
        if t.kind == "op" and t.text == "(":
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            if self.peek().kind == "op" and self.peek().text == "(":
                if t.text not in FUNCTIONS:
                    self.error(f"unknown function '{t.text}' (supported: {', '.join(FUNCTIONS)})", t)
                self.next()
                arg = self.parse_expr()
                self.expect(")")
                return Unary(t.text, arg)
            if t.text == "pi":
                return Const(math.pi, "pi")
            if t.text == "inf":
                return Const(math.inf, "inf")
            if t.text in self.coords:
                if not self.allow_coords:
                    self.error(f"coordinate '{t.text}' not allowed here", t)
                return Coord(self.coords.index(t.text), t.text)
            if t.text in self.params:
                return Param(t.text)
            self.error(f"undeclared parameter '{t.text}'", t)
        if t.kind == "end":
            self.error("unexpected end of line", t)
        self.error(f"unexpected token {t.text!r}", t)


def _const_value(e: Expr) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Unary):
        a = _const_value(e.arg)
        if e.fn == "neg":
            return -a
        fn = {"ln": math.log, "sin": math.sin, "cos": math.cos, "tan": math.tan,
              "asin": math.asin, "exp": math.exp, "abs": abs, "sqrt": math.sqrt}[e.fn]
        return fn(a)
    a, b = _const_value(e.left), _const_value(e.right)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        return a / b
    return a ** b


def parse_expression(text: str, coords: Iterable[str] = (), params: Iterable[str] = ()) -> Expr:
    """Parse a single expression; errors are reported on line 1."""
    toks = _tokenize(text, 1)
    p = _ExprParser(toks, 1, tuple(coords), tuple(params))
    e = p.parse_expr()
    if p.peek().kind != "end":
        p.error(f"unexpected token {p.peek().text!r}", p.peek())
    return e


def parse_metric_document(text: str) -> MetricSpec:
    """Parse a ``.gmet`` document into a :class:`MetricSpec`."""
    chart_names: tuple[str, ...] | None = None
    intervals: list[Interval | None] = [None] * 4
    params: list[tuple[str, float]] = []
    slots: dict[tuple[int, int], tuple[Expr, int]] = {}
    name = None
    last_line = 1
    for lineno, line in enumerate(text.splitlines(), start=1):
        last_line = lineno
        toks = _tokenize(line, lineno)
        head = toks[0]
        if head.kind == "end":
            continue
        if chart_names is None:
            if head.text != "chart":
                raise MetricSyntaxError("document must start with a 'chart' line", lineno, head.col)
            names = [t for t in toks[1:] if t.kind != "end"]
            for t in names:
                if t.kind != "ident":
                    raise MetricSyntaxError(f"invalid coordinate name {t.text!r}", lineno, t.col)
                if t.text in _KEYWORDS or t.text in FUNCTIONS or _SLOT_RE.match(t.text):
                    raise MetricSyntaxError(f"reserved word {t.text!r} used as coordinate", lineno, t.col)
            if len(names) != 4:
                col = names[4].col if len(names) > 4 else toks[-1].col
                raise MetricSyntaxError(f"chart needs exactly 4 coordinates, got {len(names)}", lineno, col)
            if len({t.text for t in names}) != 4:
                raise MetricSyntaxError("coordinate names must be distinct", lineno, names[0].col)
            chart_names = tuple(t.text for t in names)
            continue
        pnames = [p for p, _ in params]
        if head.kind == "ident" and head.text == "metric":
            raw = line.split("#", 1)[0][head.col - 1 + len("metric"):].strip()
            if not _NAME_RE.match(raw):
                raise MetricSyntaxError("expected 'metric <name>'", lineno, head.col)
            name = raw
        elif head.kind == "ident" and head.text == "param":
            t = toks[1]
            if t.kind != "ident":
                raise MetricSyntaxError("expected parameter name", lineno, t.col)
            if t.text in chart_names or t.text in _KEYWORDS or t.text in FUNCTIONS or _SLOT_RE.match(t.text):
                raise MetricSyntaxError(f"invalid parameter name {t.text!r}", lineno, t.col)
            if t.text in pnames:
                raise MetricSyntaxError(f"parameter '{t.text}' declared twice", lineno, t.col)
            p = _ExprParser(toks, lineno, (), ())
            p.i = 2
            p.expect("=")
            start = p.peek()
            val = p.parse_unary()
            if not isinstance(val, Const) or val.symbol is not None:
                raise MetricSyntaxError("parameter default must be a real literal", lineno, start.col)
            if p.peek().kind != "end":
                p.error(f"unexpected token {p.peek().text!r}", p.peek())
            params.append((t.text, val.value))
        elif head.kind == "ident" and head.text == "domain":
            t = toks[1]
            if t.kind != "ident" or t.text not in chart_names:
                raise MetricSyntaxError(f"'domain' needs a coordinate name, got {t.text!r}", lineno, t.col)
            p = _ExprParser(toks, lineno, chart_names, pnames, allow_coords=False)
            p.i = 2
            lb = p.next()
            if lb.text not in ("(", "["):
                p.error("expected '(' or '['", lb)
            lo = p.parse_expr()
            p.expect(",")
            hi = p.parse_expr()
            rb = p.next()
            if rb.text not in (")", "]"):
                p.error("expected ')' or ']'", rb)
            if p.peek().kind != "end":
                p.error(f"unexpected token {p.peek().text!r}", p.peek())
            iv = Interval(lo, hi, lb.text == "(", rb.text == ")")
            try:
                lo_v, hi_v = iv.bounds(dict(params))
            except ArithmeticError as exc:
                raise MetricSyntaxError(f"domain bound not evaluable: {exc}", lineno, lb.col) from exc
            if not lo_v < hi_v:
                raise MetricSyntaxError(f"empty domain interval {iv.to_source()}", lineno, lb.col)
            intervals[chart_names.index(t.text)] = iv
        elif head.kind == "ident" and _SLOT_RE.match(head.text):
            m = _SLOT_RE.match(head.text)
            i, j = int(m.group(1)), int(m.group(2))
            if i > 3 or j > 3:
                raise MetricSyntaxError(f"slot index out of range 0..3 in '{head.text}'", lineno, head.col)
            p = _ExprParser(toks, lineno, chart_names, pnames)
            p.i = 1
            p.expect("=")
            e = p.parse_expr()
            if p.peek().kind != "end":
                p.error(f"unexpected token {p.peek().text!r}", p.peek())
            key = (min(i, j), max(i, j))
            if key in slots:
                prev_expr, prev_line = slots[key]
                kind = "duplicate slot" if prev_expr == e else "non-symmetric duplicate slot"
                raise MetricSyntaxError(
                    f"{kind} g{i}{j}: pair ({key[0]},{key[1]}) already set on line {prev_line}",
                    lineno, head.col)
            if i > j:
                raise MetricSyntaxError(f"slot g{i}{j} must be written as g{j}{i} (i <= j)", lineno, head.col)
            slots[key] = (e, lineno)
        else:
            raise MetricSyntaxError(f"unexpected statement {head.text!r}", lineno, head.col)
    if chart_names is None:
        raise MetricSyntaxError("document has no 'chart' line", 1, 1)
    if not slots:
        raise MetricSyntaxError("document has no metric slots", last_line + 1, 1)
    comps = tuple(slots[s][0] if s in slots else ZERO for s in SLOTS)
    return MetricSpec(Chart(chart_names, tuple(intervals)), comps, tuple(params), name)


def serialize_metric_document(spec: MetricSpec) -> str:
    """Inverse of :func:`parse_metric_document`; zero slots are omitted."""
    lines = ["chart " + " ".join(spec.chart.names)]
    if spec.name:
        lines.append(f"metric {spec.name}")
    for pname, val in spec.parameters:
        lines.append(f"param {pname} = {to_source(Const(float(val)))}")
    for cname, iv in zip(spec.chart.names, spec.chart.intervals):
        if iv is not None:
            lines.append(f"domain {cname} {iv.to_source()}")
    for (i, j) in SLOTS:
        e = spec.components[sym_index(i, j)]
        if e == ZERO:
            continue
        lines.append(f"g{i}{j} = {to_source(e)}")
    return "\n".join(lines) + "\n"
