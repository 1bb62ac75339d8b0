"""Signature, principal minors, determinant closed form and singular sets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..catalog.identities import helpers_at
from ..dsl.spec import MetricSpec
from ..errors import DomainError
from ..geometry import metric_at

ZERO_EIGEN_RTOL = 1e-12
SINGULAR_TOL = 1e-9

_BLOCK_ZEROS = {(1, 2), (1, 3), (2, 3)}


@dataclass(frozen=True)
class SignatureReport:
    eigenvalues: tuple[float, ...]  # descending
    signs: tuple[str, ...]
    minors: tuple[float, ...]  # leading principal minors of order 1..4
    lorentzian: bool | None  # None when an eigenvalue is zero
    shape: str  # type-I, type-II, type-III, block or general
    predicate: str  # which sufficient condition was checked, or "eigen"
    predicate_holds: bool | None


def metric_shape(spec: MetricSpec) -> str:
    """Structural zero pattern: the first matching of type-I/II/III, then block."""
    zeros = spec.zero_slots()
    if not _BLOCK_ZEROS <= zeros:
        return "general"
    if (1, 1) in zeros:
        return "type-I"
    if (0, 0) in zeros:
        return "type-II"
    if (0, 3) in zeros:
        return "type-III"
    return "block"


def _predicate(shape: str, g: np.ndarray, det: float) -> bool | None:
    u, v, p, q = g[0]
    w, rho, sigma = g[1, 1], g[2, 2], g[3, 3]
    if shape == "type-I":
        return rho < 0 and sigma < 0 and v != 0
    if shape == "type-II":
        return w < 0 and rho < 0 and sigma < 0 and (v * v + p * p + q * q) != 0
    if shape == "type-III":
        return u > 0 and w < 0 and rho < 0 and sigma < 0
    if shape == "block":
        return det < 0 and rho < 0 and sigma < 0
    return None


def leading_minors(g: np.ndarray) -> tuple[float, float, float, float]:
    """Leading principal minors by explicit cofactor expansion."""
    m1 = g[0, 0]
    m2 = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    m3 = (g[0, 0] * (g[1, 1] * g[2, 2] - g[1, 2] * g[2, 1])
          - g[0, 1] * (g[1, 0] * g[2, 2] - g[1, 2] * g[2, 0])
          + g[0, 2] * (g[1, 0] * g[2, 1] - g[1, 1] * g[2, 0]))
    m4 = 0.0
    for j in range(4):
        sub = np.delete(np.delete(g, 0, axis=0), j, axis=1)
        m4 += (-1) ** j * g[0, j] * (
            sub[0, 0] * (sub[1, 1] * sub[2, 2] - sub[1, 2] * sub[2, 1])
            - sub[0, 1] * (sub[1, 0] * sub[2, 2] - sub[1, 2] * sub[2, 0])
            + sub[0, 2] * (sub[1, 0] * sub[2, 1] - sub[1, 1] * sub[2, 0]))
    return float(m1), float(m2), float(m3), float(m4)


def eigen_signs(eigenvalues: Sequence[float]) -> tuple[str, ...]:
    scale = max(1.0, max(abs(x) for x in eigenvalues))
    return tuple("0" if abs(x) <= ZERO_EIGEN_RTOL * scale else ("+" if x > 0 else "-")
                 for x in eigenvalues)


def signature_at(spec: MetricSpec, params, point) -> SignatureReport:
    mv = metric_at(spec, params, point, allow_singular=True)
    eig = tuple(float(x) for x in np.linalg.eigvalsh(mv.g)[::-1])
    signs = eigen_signs(eig)
    lorentzian = None if "0" in signs else (signs.count("+") == 1 and signs.count("-") == 3)
    shape = metric_shape(spec)
    holds = _predicate(shape, mv.g, mv.det)
    holds = None if holds is None else bool(holds)
    return SignatureReport(eigenvalues=eig, signs=signs, minors=leading_minors(mv.g),
                           lorentzian=lorentzian, shape=shape,
                           predicate=shape if holds is not None else "eigen",
                           predicate_holds=holds)


# -- closed forms for the polar time-periodic metric -----------------------------------

def _pp(params: Mapping[str, float]) -> dict[str, float]:
    return {"eps": float(params["eps"]), "m": float(params["m"])}


@dataclass(frozen=True)
class MinorsReport:
    minors: tuple[float, float, float, float]
    closed_forms: tuple[float, float, float] | None  # orders 2, 3, 4
    errors: tuple[float, float, float] | None  # |minor - closed| / (1 + |closed|)

    def max_error(self) -> float | None:
        return None if self.errors is None else max(self.errors)


def minors_closed_form(params: Mapping[str, float], point: Sequence[float]) -> tuple[float, float, float]:
    h = helpers_at(params, point)
    r, theta = point[1], point[2]
    x2 = (h.M * r / (r - _pp(params)["m"])) ** 2
    return -x2, h.K ** 2 * x2, -h.K ** 4 * math.sin(theta) ** 2 * x2


def principal_minors(spec: MetricSpec, params, point) -> MinorsReport:
    g = metric_at(spec, params, point, allow_singular=True).g
    minors = leading_minors(g)
    if spec.name != "time-periodic":
        return MinorsReport(minors, None, None)
    closed = minors_closed_form(spec.resolve_params(params), point)
    errs = tuple(abs(a - b) / (1.0 + abs(b)) for a, b in zip(minors[1:], closed))
    return MinorsReport(minors, closed, errs)


def det_closed_form(params: Mapping[str, float], point: Sequence[float]) -> float:
    p = _pp(params)
    t, r, theta, _ = (float(x) for x in point)
    m, eps = p["m"], p["eps"]
    if r == m:
        raise DomainError("determinant closed form undefined at r = m", point=point)
    half = math.tan(theta / 2)
    op = math.sqrt(half) + 1.0 / math.sqrt(half)
    K = r + m * math.log(abs(r - m)) + eps * math.sin(t - r)
    return -op ** 2 * math.sin(theta) ** 4 * K ** 4 * r ** 2 / (r - m) ** 2


SINGULAR_SETS = ("S_r=0", "S_r=m", "S_K=0", "S_theta=0,pi")


def singular_set_classify(params: Mapping[str, float], point: Sequence[float],
                          tol: float = SINGULAR_TOL) -> tuple[str, ...]:
    """Names of the singular sets containing ``point`` (within ``tol``), or ("regular",)."""
    p = _pp(params)
    t, r, theta, _ = (float(x) for x in point)
    m, eps = p["m"], p["eps"]
    tags = []
    if abs(r) <= tol:
        tags.append("S_r=0")
    if abs(r - m) <= tol:
        tags.append("S_r=m")
    elif abs(r + m * math.log(abs(r - m)) + eps * math.sin(t - r)) <= tol:
        tags.append("S_K=0")
    if min(theta, math.pi - theta) <= tol:
        tags.append("S_theta=0,pi")
    return tuple(tags) or ("regular",)
