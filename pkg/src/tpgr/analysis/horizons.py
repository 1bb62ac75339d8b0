"""Horizon candidate sets: zeros of f(r; t) = r + m ln|m - r| + eps sin(t - r).

Writing gamma(r) = r + m ln|r - m|, the equation is solvable in t exactly when
``|gamma(r)| <= eps``. Case I covers 0 <= r < m, where gamma decreases; case II
covers r > m, where gamma increases. Each solvable r carries two families of
times, the principal arc ``t = r + asin(-gamma/eps) + offset`` and the
conjugate arc ``t = r + pi - asin(-gamma/eps) + offset``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import bisect

from ..errors import BracketError, DomainError, HorizonInfeasible

CASES = ("I", "II")
ARCS = ("principal", "conjugate")


def _pp(params: Mapping[str, float]) -> tuple[float, float]:
    return float(params["eps"]), float(params["m"])


def _require_positive(eps: float, m: float) -> None:
    if not (eps > 0 and m > 0):
        raise ValueError(f"horizon analysis assumes eps > 0 and m > 0 (got eps={eps}, m={m})")


def gamma(m: float, r: float) -> float:
    return r + m * math.log(abs(r - m))


def gamma_prime(m: float, r: float) -> float:
    return 1.0 + m / (r - m)


def horizon_f(params: Mapping[str, float], r: float, t: float) -> float:
    eps, m = _pp(params)
    if r == m:
        raise DomainError("f(r; t) is undefined at r = m", point=(t, r))
    return r + m * math.log(abs(m - r)) + eps * math.sin(t - r)


def feasibility_ratio(params: Mapping[str, float]) -> float:
    """``-m ln m / eps``; case I time slots exist iff its magnitude is <= 1."""
    eps, m = _pp(params)
    if eps == 0:
        raise ValueError("eps must be nonzero")
    return -m * math.log(m) / eps


def _case(case: str) -> str:
    if case not in CASES:
        raise ValueError(f"case must be one of {CASES}, got {case!r}")
    return case


def _arc(arc: str) -> str:
    if arc not in ARCS:
        raise ValueError(f"arc must be one of {ARCS}, got {arc!r}")
    return arc


def _case_one_ratio(params) -> float:
    ratio = feasibility_ratio(params)
    if abs(ratio) > 1.0:
        raise HorizonInfeasible(f"case I infeasible: |m ln m / eps| = {abs(ratio):.6g} > 1", ratio)
    return ratio


def branch_offset(params: Mapping[str, float], k: int, case: str, arc: str = "principal") -> float:
    """Multiple of 2 pi added to branch ``k``; the principal case-I arc with
    m > 1 starts one period later so that its r = 0 time is nonnegative."""
    _, m = _pp(params)
    if case == "I" and arc == "principal" and m > 1:
        return 2 * (k + 1) * math.pi
    return 2 * k * math.pi


# -- extents ------------------------------------------------------------------------

@dataclass(frozen=True)
class HorizonExtent:
    case: str
    r_lo: float
    r_hi: float  # r_- for case I; (r_0, r_+) for case II


def _solve(fn, lo: float, hi: float) -> float:
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo:.17g}, {hi:.17g}]")
    return float(bisect(fn, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=400))


def _near_m(m: float, above: bool, target: float) -> float:
    """A point on the chosen side of r = m where gamma < target."""
    d = 0.5 * m if not above else 1.0
    for _ in range(2000):
        r = m + d if above else m - d
        if r != m and gamma(m, r) < target:
            return r
        d *= 0.5
    raise BracketError("could not bracket the logarithmic pole at r = m")


def horizon_extent(params: Mapping[str, float], case: str) -> HorizonExtent:
    eps, m = _pp(params)
    _require_positive(eps, m)
    if _case(case) == "I":
        _case_one_ratio(params)
        if gamma(m, 0.0) < -eps:  # pragma: no cover - excluded by the ratio test
            raise HorizonInfeasible("case I: gamma(0) < -eps, no extent in [0, m)")
        hi = _near_m(m, above=False, target=-eps)
        r_minus = _solve(lambda r: gamma(m, r) + eps, 0.0, hi)
        return HorizonExtent("I", 0.0, r_minus)
    lo = _near_m(m, above=True, target=-eps)
    hi = m + 1.0
    while gamma(m, hi) <= eps:
        hi = m + 2 * (hi - m)
    r0 = _solve(lambda r: gamma(m, r) + eps, lo, hi)
    r_plus = _solve(lambda r: gamma(m, r) - eps, r0, hi)
    return HorizonExtent("II", r0, r_plus)


def horizon_time_slots(params: Mapping[str, float], k: int, case: str) -> float:
    """The slot time t_k: at r = 0 for case I, at r = r_0 for case II."""
    eps, m = _pp(params)
    if _case(case) == "I":
        ratio = _case_one_ratio(params)
        return branch_offset(params, k, "I") + math.asin(ratio)
    r0 = horizon_extent(params, "II").r_lo
    return r0 + math.pi / 2 + 2 * k * math.pi


def endpoint_times(params: Mapping[str, float], k: int, case: str, arc: str) -> tuple[float, float]:
    """Closed-form times at both ends of a branch (t_k then t_k^- or t_k^+)."""
    ext = horizon_extent(params, case)
    off = branch_offset(params, k, case, _arc(arc))
    if case == "I":
        s0 = math.asin(feasibility_ratio(params))
        start = off + (s0 if arc == "principal" else math.pi - s0)
        return start, ext.r_hi + math.pi / 2 + off
    end = ext.r_hi + (-math.pi / 2 if arc == "principal" else 1.5 * math.pi)
    return ext.r_lo + math.pi / 2 + off, end + off


# -- tracing ----------------------------------------------------------------------------

@dataclass(frozen=True)
class HorizonBranch:
    k: int
    case: str
    arc: str
    r: np.ndarray
    t: np.ndarray
    residual: np.ndarray  # f(r, t(r))
    r_lo: float
    r_hi: float
    t_start: float
    t_end: float

    @property
    def trend(self) -> str:
        d = np.diff(self.t)
        if np.all(d > 0):
            return "increasing"
        if np.all(d < 0):
            return "decreasing"
        return "mixed"

    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residual)))


def trace_horizon_branch(params: Mapping[str, float], k: int, case: str, arc: str = "principal",
                         samples: int = 200) -> HorizonBranch:
    """Sample t(r) along one branch of the zero set on its feasible r-interval."""
    eps, m = _pp(params)
    if samples < 2:
        raise ValueError("need at least 2 samples")
    ext = horizon_extent(params, case)
    off = branch_offset(params, k, case, _arc(arc))
    rs = np.linspace(ext.r_lo, ext.r_hi, samples)
    # At the interval ends the arcsin argument is known exactly; evaluating it
    # from the rounded root would cost sqrt(machine epsilon) in t near +-1.
    if case == "I":
        ends = {0: feasibility_ratio(params), samples - 1: 1.0}
    else:
        ends = {0: 1.0, samples - 1: -1.0}
    ts = np.empty(samples)
    for i, r in enumerate(rs):
        arg = ends.get(i, min(1.0, max(-1.0, -gamma(m, r) / eps)))
        s = math.asin(arg)
        ts[i] = r + (s if arc == "principal" else math.pi - s) + off
    res = np.array([horizon_f(params, r, t) for r, t in zip(rs, ts)])
    t0, t1 = endpoint_times(params, k, case, arc)
    return HorizonBranch(k, case, arc, rs, ts, res, ext.r_lo, ext.r_hi, t0, t1)
