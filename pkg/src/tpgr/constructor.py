"""Type-I construction: the closed-form G_11, the quadrature for v, the
exponential ansatz, and the ordered cascade of field-equation residuals.

The second chart coordinate plays the role of ``x`` throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .dsl import eval_tape
from .dsl.expr import ZERO, Binary, Const, Expr, Unary, coords_used, is_zero, params_used
from .dsl.jet import Jet2
from .dsl.parser import parse_expression
from .dsl.spec import Chart, MetricSpec
from .dsl.tape import compile_tape
from .errors import DomainError, ProvisoError, QuadratureError
from .geometry import curvature_at, fd_curvature_oracle, map_points

X = 1  # index of the x-role coordinate

# The closed-form G_11 below is written for the Ricci sign convention
# R_mn = R^l_{mnl}, the opposite of the one the geometry module uses
# (R_mn = R^l_{mln}). The two Einstein tensors differ by an overall sign:
#     geometry G_11 == CLOSED_FORM_SIGN * g11_closed_form(...)
CLOSED_FORM_SIGN = -1.0

CASCADE_ORDER: tuple[tuple[str, tuple[int, int]], ...] = (
    ("G11", (1, 1)),
    ("G12", (1, 2)),
    ("G13", (1, 3)),
    ("G23", (2, 3)),
    ("G22+L*rho", (2, 2)),
    ("G33+L*sigma", (3, 3)),
    ("G01+L*v", (0, 1)),
    ("G02+L*p", (0, 2)),
    ("G03+L*q", (0, 3)),
    ("G00+L*u", (0, 0)),
)


@dataclass(frozen=True)
class TypeITemplate:
    chart: Chart
    u: Expr
    p: Expr
    q: Expr
    rho: Expr
    sigma: Expr
    v: Expr | None = None  # None: unknown, to be recovered by solve_v
    v0: Expr = Const(1.0)
    parameters: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if X in coords_used(self.v0):
            raise ValueError("v0 may not depend on the x coordinate")

    def params(self, overrides: Mapping[str, float] | None = None) -> dict[str, float]:
        out = dict(self.parameters)
        out.update(overrides or {})
        return out

    def to_metric(self, name: str | None = None) -> MetricSpec:
        if self.v is None:
            raise ValueError("v is unknown; solve for it first")
        entries = {(0, 0): self.u, (0, 1): self.v, (0, 2): self.p, (0, 3): self.q,
                   (2, 2): self.rho, (3, 3): self.sigma}
        entries = {k: e for k, e in entries.items() if not is_zero(e)}
        return MetricSpec.from_matrix(self.chart, entries, self.parameters, name)


@dataclass(frozen=True)
class AnsatzSpec:
    rho_t: Expr  # rho = rho_t * exp(2 f)
    sigma_t: Expr  # sigma = sigma_t * exp(2 f)
    f: Expr  # function of (t, x) only
    v0: Expr = Const(1.0)

    def __post_init__(self):
        if coords_used(self.f) - {0, X}:
            raise ValueError("f may depend on t and x only")
        for e in (self.rho_t, self.sigma_t, self.v0):
            if X in coords_used(e):
                raise ValueError("rho_t, sigma_t and v0 may not depend on x")


def _exp2f(f: Expr) -> Expr:
    return Binary("*", Const(2.0), f)


def template_from_ansatz(ansatz: AnsatzSpec, chart: Chart, u: Expr = ZERO, p: Expr = ZERO,
                         q: Expr = ZERO, parameters=()) -> TypeITemplate:
    """Type-I template with ``rho, sigma = (rho_t, sigma_t) * exp(2 f)`` and v unknown."""
    e2f = Unary("exp", _exp2f(ansatz.f))
    return TypeITemplate(chart=chart, u=u, p=p, q=q,
                         rho=Binary("*", ansatz.rho_t, e2f), sigma=Binary("*", ansatz.sigma_t, e2f),
                         v=None, v0=ansatz.v0, parameters=tuple(parameters))


def _jets(exprs: Sequence[Expr], point, params) -> list[Jet2]:
    names = sorted(set().union(*(params_used(e) for e in exprs)))
    tape = compile_tape(list(exprs), names)
    return [Jet2.from_list(row) for row in eval_tape(tape, point, params)]


def g11_closed_form(template: TypeITemplate, point: Sequence[float],
                    params: Mapping[str, float] | None = None) -> float:
    """G_11 of a Type-I metric from v, rho, sigma and their x-derivatives alone.

    The formula is evaluated as written; see :data:`CLOSED_FORM_SIGN` for how
    it relates to the engine's Einstein tensor.
    """
    if template.v is None:
        raise ValueError("g11_closed_form needs a known v")
    v, rho, sigma = _jets([template.v, template.rho, template.sigma], point, template.params(params))
    for name, j in (("v", v), ("rho", rho), ("sigma", sigma)):
        if j.value == 0.0:
            raise DomainError(f"division by zero: {name} vanishes", point=point)
    a = rho.grad[X] / rho.value
    b = sigma.grad[X] / sigma.value
    return -0.5 * ((v.grad[X] / v.value) * (a + b) + 0.5 * (a * a + b * b)
                   - (rho.d2(X, X) / rho.value + sigma.d2(X, X) / sigma.value))


def v_integrand(template: TypeITemplate, params: Mapping[str, float] | None = None
                ) -> Callable[[Sequence[float]], float]:
    """The x-integrand whose exponential gives v/v0, as a function of a point."""
    params = template.params(params)
    names = sorted(params_used(template.rho) | params_used(template.sigma))
    tape = compile_tape([template.rho, template.sigma], names)

    def integrand(point) -> float:
        jr, js = (Jet2.from_list(row) for row in eval_tape(tape, point, params))
        r, s = jr.value, js.value
        rs_x = jr.grad[X] * s + r * js.grad[X]
        if rs_x == 0.0:
            raise ProvisoError("(rho*sigma)_x vanishes", point[X])
        a, b = jr.grad[X] / r, js.grad[X] / s
        bracket = jr.d2(X, X) / r + js.d2(X, X) / s - 0.5 * a * a - 0.5 * b * b
        return bracket * (r * s) / rs_x

    return integrand


# -- adaptive Simpson ------------------------------------------------------------------

MAX_DEPTH = 40


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     abs_tol: float = 1e-12, rel_tol: float = 1e-10) -> float:
    """Integral of ``f`` over [a, b] by recursive Simpson with Richardson correction.

    Raises :class:`QuadratureError` when the recursion reaches depth 40 or the
    subinterval width underflows, which signals a non-integrable singularity.
    """
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4 * fm + fb) / 6.0
    scale = abs(whole)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        if not (a < lm < m < rm < b):
            raise QuadratureError(f"step underflow near x = {m:.17g}")
        flm, frm = f(lm), f(rm)
        left = (m - a) * (fa + 4 * flm + fm) / 6.0
        right = (b - m) * (fm + 4 * frm + fb) / 6.0
        delta = left + right - whole
        if not math.isfinite(delta):
            raise QuadratureError(f"non-finite integrand near x = {m:.17g}")
        if abs(delta) <= 15 * tol:
            return left + right + delta / 15.0
        if depth >= MAX_DEPTH:
            raise QuadratureError(f"depth limit {MAX_DEPTH} reached near x = {m:.17g}")
        return (rec(a, m, fa, flm, fm, left, tol / 2, depth + 1)
                + rec(m, b, fm, frm, fb, right, tol / 2, depth + 1))

    return rec(a, b, fa, fm, fb, whole, max(abs_tol, rel_tol * scale), 0)


@dataclass(frozen=True)
class VSolution:
    x: np.ndarray
    v: np.ndarray
    log_ratio: np.ndarray  # integral of the integrand from x0


def solve_v(template: TypeITemplate, x_interval: tuple[float, float], x0: float, v_at_x0: float,
            tol: float = 1e-12, other: Sequence[float] = (0.0, 0.0, 0.0), n_grid: int = 20,
            params: Mapping[str, float] | None = None) -> VSolution:
    """v on a uniform grid of ``n_grid`` points of ``x_interval``.

    ``other`` fixes (t, y, z); v(x) = v(x0) exp(integral from x0 to x).
    """
    lo, hi = map(float, x_interval)
    integrand = v_integrand(template, params)
    t, y, z = other

    def f(x: float) -> float:
        return integrand((t, x, y, z))

    grid = np.linspace(lo, hi, n_grid)
    knots = np.unique(np.concatenate([grid, [x0]]))
    pieces = [adaptive_simpson(f, knots[i], knots[i + 1], abs_tol=tol, rel_tol=tol)
              for i in range(len(knots) - 1)]
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    cum -= cum[int(np.searchsorted(knots, x0))]
    log_ratio = np.interp(grid, knots, cum)  # exact at the grid knots
    return VSolution(grid, v_at_x0 * np.exp(log_ratio), log_ratio)


def v_from_ansatz(ansatz: AnsatzSpec, point: Sequence[float],
                  params: Mapping[str, float] | None = None) -> float:
    """``v0 * f_x * exp(f)`` at ``point``."""
    f, v0 = _jets([ansatz.f, ansatz.v0], point, dict(params or {}))
    return v0.value * f.grad[X] * math.exp(f.value)


# -- cascade --------------------------------------------------------------------------

@dataclass(frozen=True)
class CascadeReport:
    labels: tuple[str, ...]
    points: np.ndarray
    residuals: np.ndarray  # (n_labels, n_points), jet pipeline
    oracle_residuals: np.ndarray | None  # same layout, finite-difference pipeline
    lam: float

    def max_abs(self) -> dict[str, float]:
        return {lab: float(np.max(np.abs(row))) for lab, row in zip(self.labels, self.residuals)}

    def pipeline_discrepancy(self) -> float | None:
        if self.oracle_residuals is None:
            return None
        scale = 1.0 + float(np.max(np.abs(self.residuals)))
        return float(np.max(np.abs(self.residuals - self.oracle_residuals))) / scale


def cascade_residual_report(spec: MetricSpec, lam: float, points: Sequence[Sequence[float]],
                            params: Mapping[str, float] | None = None, oracle: bool = False,
                            workers: int = 1) -> CascadeReport:
    """Residual ``G_ij + lam g_ij`` of each equation, in construction order."""
    idx = [ij for _, ij in CASCADE_ORDER]

    def one(pt):
        b = curvature_at(spec, params, pt)
        row = [b.einstein[i, j] + lam * b.g[i, j] for i, j in idx]
        if not oracle:
            return row, None
        o = fd_curvature_oracle(spec, params, pt)
        return row, [o.einstein[i, j] + lam * o.g[i, j] for i, j in idx]

    pts = np.array(points, dtype=float).reshape(-1, 4)
    results = map_points(one, list(pts), workers)
    jet = np.array([r for r, _ in results]).T.reshape(len(idx), len(pts))
    orc = np.array([o for _, o in results]).T.reshape(len(idx), len(pts)) if oracle else None
    return CascadeReport(tuple(lab for lab, _ in CASCADE_ORDER), pts, jet, orc, float(lam))


def parse_ansatz(f: str, rho_t: str = "-1", sigma_t: str = "-1", v0: str = "1",
                 chart: Sequence[str] = ("t", "x", "y", "z"), params: Sequence[str] = ()) -> AnsatzSpec:
    """Convenience constructor from expression text."""
    def px(s):
        return parse_expression(s, chart, params)
    return AnsatzSpec(rho_t=px(rho_t), sigma_t=px(sigma_t), f=px(f), v0=px(v0))

