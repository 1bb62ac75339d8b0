"""Metric values, Levi-Civita connection, curvature and field-equation residuals.

Two independent derivative pipelines live here:

* the jet pipeline (:func:`curvature_at`), which reads exact first and
  second partials of every component from the compiled tape, and
* the finite-difference oracle (:func:`fd_curvature_oracle`), which only ever
  evaluates metric *values* and differentiates them numerically.

Conventions: signature (+,-,-,-);
``Gamma^l_{mn} = 1/2 g^{lk} (d_m g_{kn} + d_n g_{km} - d_k g_{mn})``;
``R^r_{smn} = d_m Gamma^r_{ns} - d_n Gamma^r_{ms} + Gamma^r_{ml} Gamma^l_{ns}
- Gamma^r_{nl} Gamma^l_{ms}``; ``R_{sn} = R^m_{smn}``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, TypeVar

import numpy as np

from . import _backend
from .dsl import eval_tape
from .dsl.expr import evaluate_values
from .dsl.jet import Jet2
from .dsl.spec import SLOTS, MetricSpec
from .dsl.tape import MetricTape, compile_tape
from .errors import DomainError, OutsideChartError, SingularPointError

DET_THRESHOLD = 1e-14
DEFAULT_ORACLE_STEP = 1e-3

T = TypeVar("T")
R = TypeVar("R")

_SYM = np.empty((4, 4), dtype=np.intp)
for _k, (_i, _j) in enumerate(SLOTS):
    _SYM[_i, _j] = _SYM[_j, _i] = _k


@dataclass(frozen=True)
class MetricValue:
    g: np.ndarray
    g_inv: np.ndarray | None  # None only when built with allow_singular
    det: float
    jets: np.ndarray  # (10, 15), SLOTS order

    def jet(self, i: int, j: int) -> Jet2:
        return Jet2.from_list(self.jets[_SYM[i, j]])


@dataclass(frozen=True)
class ChristoffelField:
    gamma: np.ndarray  # gamma[l, m, n] = Gamma^l_{mn}
    dgamma: np.ndarray  # dgamma[k, l, m, n] = d_k Gamma^l_{mn}


@dataclass(frozen=True)
class CurvatureBundle:
    g: np.ndarray
    g_inv: np.ndarray
    gamma: np.ndarray
    riemann_low: np.ndarray  # R_{abcd}
    ricci: np.ndarray
    scalar: float
    einstein: np.ndarray
    kretschmann: float
    # max|g| * (max|dGamma| + max|Gamma|^2): the size of the terms that cancel
    # in R when the metric is flat, hence the scale of its rounding error.
    term_scale: float = 0.0

    def max_abs(self) -> float:
        """Largest magnitude over every curvature field of the bundle."""
        return float(max(np.max(np.abs(self.riemann_low)), np.max(np.abs(self.ricci)),
                         abs(self.scalar), np.max(np.abs(self.einstein)), abs(self.kretschmann)))

    def symmetry_residuals(self) -> dict[str, float]:
        """Algebraic Riemann symmetries, normalized by ``1 + max(max|R|, term_scale)``."""
        r = self.riemann_low
        scale = 1.0 + max(float(np.max(np.abs(r))), self.term_scale)
        bianchi = r + np.einsum("abcd->acdb", r) + np.einsum("abcd->adbc", r)
        return {
            "antisym_first_pair": float(np.max(np.abs(r + np.einsum("abcd->bacd", r)))) / scale,
            "antisym_second_pair": float(np.max(np.abs(r + np.einsum("abcd->abdc", r)))) / scale,
            "pair_exchange": float(np.max(np.abs(r - np.einsum("abcd->cdab", r)))) / scale,
            "first_bianchi": float(np.max(np.abs(bianchi))) / scale,
        }


# -- compiled tapes ------------------------------------------------------------

_TAPES: dict[int, tuple[MetricSpec, MetricTape]] = {}


def tape_for(spec: MetricSpec) -> MetricTape:
    """Compiled tape of the 10 components, cached per spec object."""
    hit = _TAPES.get(id(spec))
    if hit is not None and hit[0] is spec:
        return hit[1]
    if len(_TAPES) > 256:
        _TAPES.clear()
    tape = compile_tape(spec.components, spec.param_names)
    _TAPES[id(spec)] = (spec, tape)
    return tape


def _params(spec: MetricSpec, params: Mapping[str, float] | None) -> dict[str, float]:
    return spec.resolve_params(params)


def _singular_tags(spec: MetricSpec, params: Mapping[str, float], point) -> tuple[str, ...]:
    if spec.name != "time-periodic":
        return ()
    from .analysis import singular_set_classify  # lazy: analysis imports geometry

    return tuple(t for t in singular_set_classify(params, point) if t != "regular")


def _jets(spec: MetricSpec, params: Mapping[str, float], point) -> np.ndarray:
    spec.chart.check(point, params)
    try:
        return eval_tape(tape_for(spec), point, params)
    except OutsideChartError:
        raise
    except DomainError as exc:
        raise SingularPointError(f"metric not evaluable: {exc}", point=point,
                                 tags=_singular_tags(spec, params, point),
                                 subexpr=exc.subexpr) from exc


# -- public operations -----------------------------------------------------------

def metric_at(spec: MetricSpec, params: Mapping[str, float] | None, point: Sequence[float],
              *, allow_singular: bool = False) -> MetricValue:
    """Metric matrix, inverse and determinant at ``point``.

    Raises :class:`SingularPointError` when ``|det| < 1e-14`` unless
    ``allow_singular`` is set, in which case ``g_inv`` is None.
    """
    params = _params(spec, params)
    pt = np.asarray(point, dtype=float)
    jets = _jets(spec, params, pt)
    g, ginv, det = _backend.get().metric_from_jets(jets)
    if abs(det) < DET_THRESHOLD:
        if not allow_singular:
            raise SingularPointError(f"degenerate metric, det = {det:.3g}", point=pt,
                                     tags=_singular_tags(spec, params, pt))
        ginv = None
    return MetricValue(g=g, g_inv=ginv, det=float(det), jets=jets)


def _curvature_tuple(spec, params, point):
    params = _params(spec, params)
    pt = np.asarray(point, dtype=float)
    jets = _jets(spec, params, pt)
    _, _, det = _backend.get().metric_from_jets(jets)
    if abs(det) < DET_THRESHOLD:
        raise SingularPointError(f"degenerate metric, det = {det:.3g}", point=pt,
                                 tags=_singular_tags(spec, params, pt))
    return _backend.get().curvature_from_jets(jets)


def christoffel_at(spec: MetricSpec, params, point) -> ChristoffelField:
    out = _curvature_tuple(spec, params, point)
    return ChristoffelField(gamma=out[3], dgamma=out[4])


def curvature_at(spec: MetricSpec, params, point) -> CurvatureBundle:
    g, ginv, _, gamma, dgamma, riem, ricci, scalar, ein, kret = _curvature_tuple(spec, params, point)
    return CurvatureBundle(g=g, g_inv=ginv, gamma=gamma, riemann_low=riem, ricci=ricci,
                           scalar=float(scalar), einstein=ein, kretschmann=float(kret),
                           term_scale=_term_scale(g, gamma, dgamma))


def _term_scale(g, gamma, dgamma) -> float:
    return float(np.max(np.abs(g)) * (np.max(np.abs(dgamma)) + np.max(np.abs(gamma)) ** 2))


def field_residual_at(spec: MetricSpec, params, point, lam: float = 0.0) -> np.ndarray:
    """``G_{mn} + lam * g_{mn}``; zero exactly when the vacuum equations hold."""
    b = curvature_at(spec, params, point)
    return b.einstein + lam * b.g


# -- finite-difference oracle ------------------------------------------------------

def assemble_curvature(g: np.ndarray, ginv: np.ndarray, gamma: np.ndarray,
                       dgamma: np.ndarray) -> CurvatureBundle:
    """Curvature fields from a connection and its derivatives (oracle path)."""
    riem_up = np.zeros((4, 4, 4, 4))
    for r in range(4):
        for s in range(4):
            for m in range(4):
                for n in range(4):
                    riem_up[r, s, m, n] = (dgamma[m, r, n, s] - dgamma[n, r, m, s]
                                           + gamma[r, m, :] @ gamma[:, n, s]
                                           - gamma[r, n, :] @ gamma[:, m, s])
    riem_low = np.tensordot(g, riem_up, axes=(1, 0))
    ricci = np.trace(riem_up, axis1=0, axis2=2)
    ricci = 0.5 * (ricci + ricci.T)
    scalar = float(np.sum(ginv * ricci))
    einstein = ricci - 0.5 * scalar * g
    up = riem_low
    for axis in range(4):
        up = np.moveaxis(np.tensordot(ginv, up, axes=(1, axis)), 0, axis)
    kret = float(np.sum(up * riem_low))
    return CurvatureBundle(g=g, g_inv=ginv, gamma=gamma, riemann_low=riem_low, ricci=ricci,
                           scalar=scalar, einstein=einstein, kretschmann=kret,
                           term_scale=_term_scale(g, gamma, dgamma))


def _metric_values(spec: MetricSpec, params, points: np.ndarray) -> np.ndarray:
    vals = np.stack([evaluate_values(e, points, params) for e in spec.components], axis=-1)
    return vals[:, _SYM]  # (N, 4, 4)


# Central first-derivative weights (offset -> weight, divided by h).
STENCILS = {
    2: {1: 0.5, -1: -0.5},
    4: {-2: 1 / 12, -1: -8 / 12, 1: 8 / 12, 2: -1 / 12},
}
ADAPTIVE_START = {2: DEFAULT_ORACLE_STEP, 4: 1e-2}
ADAPTIVE_LEVELS = 7


def _fd_connection(spec, params, x0: np.ndarray, h: float, order: int = 2):
    """Gamma at ``x0`` and its derivatives by nested central differences:
    Gamma from differences of g at each stencil node, then dGamma from
    differences of those Gammas."""
    weights = STENCILS[order]
    offs = list(weights)
    w = np.array([weights[o] for o in offs])
    eye = np.eye(4) * h
    centers = [x0] + [x0 + o * eye[k] for k in range(4) for o in offs]
    pts = []
    for c in centers:
        pts.append(c)
        for a in range(4):
            pts += [c + o * eye[a] for o in offs]
    npt = 1 + 4 * len(offs)
    pts = np.array(pts)
    for k, iv in enumerate(spec.chart.intervals):
        if iv is not None:
            lo, hi = iv.bounds(params)
            if pts[:, k].min() <= lo or pts[:, k].max() >= hi:
                raise OutsideChartError(
                    f"stencil of width {h:.3g} crosses the chart edge of {spec.chart.names[k]}",
                    point=x0)
    g_all = _metric_values(spec, params, pts).reshape(len(centers), npt, 4, 4)

    def diff(stack):  # stack: (4 * len(offs), ...) -> (4, ...)
        stack = stack.reshape((4, len(offs)) + stack.shape[1:])
        return np.tensordot(w, stack, axes=(0, 1)) / h

    gammas = []
    for block in g_all:
        dg = diff(block[1:])  # dg[a, i, j] = d_a g_ij
        gam1 = 0.5 * (np.einsum("mkn->kmn", dg) + np.einsum("nkm->kmn", dg) - dg)
        gammas.append(np.tensordot(np.linalg.inv(block[0]), gam1, axes=(1, 0)))
    dgamma = diff(np.array(gammas[1:]))
    return g_all[0, 0], gammas[0], dgamma


def _extrapolate(coarse: CurvatureBundle, fine: CurvatureBundle, order: int) -> CurvatureBundle:
    k = 2.0 ** order - 1.0

    def ex(a, b):
        return b + (b - a) / k

    return CurvatureBundle(
        g=fine.g, g_inv=fine.g_inv, gamma=ex(coarse.gamma, fine.gamma),
        riemann_low=ex(coarse.riemann_low, fine.riemann_low), ricci=ex(coarse.ricci, fine.ricci),
        scalar=float(ex(coarse.scalar, fine.scalar)), einstein=ex(coarse.einstein, fine.einstein),
        kretschmann=float(ex(coarse.kretschmann, fine.kretschmann)), term_scale=fine.term_scale)


def fd_curvature_oracle(spec: MetricSpec, params, point: Sequence[float],
                        step: float | None = None, richardson: bool = True,
                        order: int = 4) -> CurvatureBundle:
    """Curvature from metric values only, by central differences of the given
    ``order`` (2 or 4).

    With an explicit ``step`` each field is computed at ``step`` and, with
    ``richardson``, again at ``step/2``, then extrapolated as
    ``B(h/2) + (B(h/2) - B(h)) / (2**order - 1)``.

    Without one, extrapolated estimates are formed on a ladder of halving
    steps. Of the two consecutive estimates that agree best, the coarser one
    is returned, since it carries less cancellation error and its truncation
    error is already small. Near the singular sets the metric varies on short
    scales, so no single step suits every point.
    """
    if order not in STENCILS:
        raise ValueError(f"order must be one of {sorted(STENCILS)}")
    params = _params(spec, params)
    x0 = np.asarray(point, dtype=float)
    spec.chart.check(x0, params)

    def bundle(h):
        g, gamma, dgamma = _fd_connection(spec, params, x0, h, order)
        ginv = np.linalg.inv(g)
        return assemble_curvature(g, 0.5 * (ginv + ginv.T), gamma, dgamma)

    try:
        if step is not None:
            coarse = bundle(step)
            return _extrapolate(coarse, bundle(step / 2), order) if richardson else coarse
        raw = []
        for k in range(ADAPTIVE_LEVELS + 1):
            try:
                raw.append(bundle(ADAPTIVE_START[order] * 0.5 ** k))
            except DomainError:
                if raw:  # a finer stencil cannot leave the domain if a coarser one did not
                    raise
        if len(raw) < 3:
            raise DomainError("point too close to the chart boundary for the oracle stencil")
    except DomainError as exc:
        raise DomainError(f"finite-difference stencil left the domain: {exc}",
                          point=x0) from exc
    est = [_extrapolate(a, b, order) for a, b in zip(raw, raw[1:])]
    gaps = [bundle_discrepancy(a, b) for a, b in zip(est, est[1:])]
    return est[int(np.argmin(gaps))]


def bundle_discrepancy(a: CurvatureBundle, b: CurvatureBundle) -> float:
    """Max componentwise difference over all curvature fields, relative to
    ``1 + max|component|`` of ``a``."""
    pairs = [(a.gamma, b.gamma), (a.riemann_low, b.riemann_low), (a.ricci, b.ricci),
             (np.array(a.scalar), np.array(b.scalar)), (a.einstein, b.einstein),
             (np.array(a.kretschmann), np.array(b.kretschmann))]
    diff = max(float(np.max(np.abs(x - y))) for x, y in pairs)
    scale = max(float(np.max(np.abs(x))) for x, _ in pairs)
    return diff / (1.0 + scale)


def contracted_bianchi(spec: MetricSpec, params, point, step: float = 1e-3) -> np.ndarray:
    """``nabla^m G_{mn}`` with ``d G`` taken by Richardson-extrapolated central
    differences of the jet-pipeline Einstein tensor."""
    params = _params(spec, params)
    x0 = np.asarray(point, dtype=float)
    base = curvature_at(spec, params, x0)

    def d_einstein(h):
        out = np.empty((4, 4, 4))
        for a in range(4):
            e = np.zeros(4)
            e[a] = h
            out[a] = (field_residual_at(spec, params, x0 + e)
                      - field_residual_at(spec, params, x0 - e)) / (2 * h)
        return out

    c, f = d_einstein(step), d_einstein(step / 2)
    dG = f + (f - c) / 3.0  # dG[a, m, n] = d_a G_{mn}
    G, gam, ginv = base.einstein, base.gamma, base.g_inv
    cov = (dG - np.einsum("lam,ln->amn", gam, G) - np.einsum("lan,ml->amn", gam, G))
    return np.einsum("am,amn->n", ginv, cov)


# -- point sets ------------------------------------------------------------------

def map_points(fn: Callable[[T], R], points: Iterable[T], workers: int = 1) -> list[R]:
    """Apply ``fn`` to every point, results in input order for any worker count."""
    points = list(points)
    if workers <= 1 or len(points) < 2:
        return [fn(p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, points))


def relative_error(value: float, reference: float) -> float:
    if reference == 0.0:
        return abs(value)
    return abs(value - reference) / abs(reference)


__all__ = [
    "ChristoffelField", "CurvatureBundle", "DEFAULT_ORACLE_STEP", "DET_THRESHOLD", "MetricValue",
    "ADAPTIVE_LEVELS", "assemble_curvature", "bundle_discrepancy", "christoffel_at", "contracted_bianchi",
    "curvature_at", "fd_curvature_oracle", "field_residual_at", "map_points", "metric_at",
    "relative_error", "tape_for",
]
