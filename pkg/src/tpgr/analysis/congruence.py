"""Congruence diagonalization of the polar metric and its large-r behaviour."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..catalog.identities import helpers_at
from ..catalog.metrics import time_periodic_polar
from ..errors import DomainError
from ..geometry import metric_at
from .signature import eigen_signs

PIVOT_RTOL = 1e-14
ANISOTROPY_TOL = 1e-10


def congruence_reduce(g: np.ndarray) -> np.ndarray:
    """Pivots of symmetric Gaussian elimination in index order 0, 1, 2, 3."""
    a = np.array(g, dtype=float)
    scale = float(np.max(np.abs(a)))
    pivots = np.empty(4)
    for k in range(4):
        piv = a[k, k]
        if abs(piv) <= PIVOT_RTOL * scale:
            raise DomainError(f"zero pivot at step {k} of the congruence reduction")
        pivots[k] = piv
        col = a[k + 1:, k].copy()
        a[k + 1:, k + 1:] -= np.outer(col, col) / piv
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
    return pivots


@dataclass(frozen=True)
class DiagonalForm:
    entries: tuple[float, float, float, float]
    closed_form: tuple[float, float, float, float]
    det: float

    @property
    def product(self) -> float:
        return float(np.prod(self.entries))

    @property
    def signs(self) -> tuple[str, ...]:
        return eigen_signs(self.entries)

    def max_rel_error(self) -> float:
        return max(abs(a - b) / abs(b) for a, b in zip(self.entries, self.closed_form))


def diagonal_closed_form(params: Mapping[str, float], point: Sequence[float]) -> tuple[float, ...]:
    h = helpers_at(params, point)
    r, theta = point[1], point[2]
    m = float(params["m"])
    return (h.G, -(h.M * r) ** 2 / (h.G * (r - m) ** 2), -h.K ** 2,
            -h.K ** 2 * math.sin(theta) ** 2)


def congruence_diagonal(params: Mapping[str, float], point: Sequence[float]) -> DiagonalForm:
    p = {"eps": float(params["eps"]), "m": float(params["m"])}
    mv = metric_at(time_periodic_polar(**p), None, point)
    entries = tuple(float(x) for x in congruence_reduce(mv.g))
    return DiagonalForm(entries, diagonal_closed_form(p, point), mv.det)


@dataclass(frozen=True)
class AsymptoticRow:
    r: float
    k_over_r: float
    k_over_r_predicted: float  # 1 + (m ln(r - m) + eps sin(phase)) / r
    entry_ratios: tuple[float, float, float, float]  # entry / large-r form


@dataclass(frozen=True)
class AsymptoticAudit:
    theta: float
    phase: float
    rows: tuple[AsymptoticRow, ...]
    witness: dict  # entries 0 and 1 at the largest r for theta = pi/3 and pi/2
    anisotropic: bool


def _large_r_forms(params, point) -> tuple[float, ...]:
    h = helpers_at(params, point)
    r, theta = point[1], point[2]
    s2 = math.sin(theta) ** 2
    return (h.G, -(h.omega_plus ** 2) * s2 / h.G, -r * r, -r * r * s2)


def asymptotic_audit(params: Mapping[str, float], theta: float, r_values: Sequence[float],
                     phase: float = 0.0) -> AsymptoticAudit:
    """Diagonal entries against their large-r forms along ``t = r + phase``.

    Holding ``t - r`` fixed removes the oscillation in t, so the only
    r-dependence left is the approach K/r -> 1.
    """
    p = {"eps": float(params["eps"]), "m": float(params["m"])}
    rs = [float(r) for r in r_values]
    if any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("r values must be strictly increasing")
    rows = []
    for r in rs:
        pt = (r + phase, r, theta, 0.0)
        d = congruence_diagonal(p, pt)
        h = helpers_at(p, pt)
        lim = _large_r_forms(p, pt)
        pred = 1.0 + (p["m"] * math.log(abs(r - p["m"])) + p["eps"] * math.sin(phase)) / r
        rows.append(AsymptoticRow(r, h.K / r, pred,
                                  tuple(a / b for a, b in zip(d.entries, lim))))
    r_big = rs[-1]
    witness = {}
    for name, th in (("pi/3", math.pi / 3), ("pi/2", math.pi / 2)):
        d = congruence_diagonal(p, (r_big + phase, r_big, th, 0.0))
        witness[name] = {"entry0": d.entries[0], "entry1": d.entries[1],
                         "g00_coefficient": 2 * p["eps"] * helpers_at(p, (0, r_big, th, 0)).M}
    gap = max(abs(witness["pi/3"][k] - witness["pi/2"][k]) for k in ("entry0", "entry1"))
    return AsymptoticAudit(theta, phase, tuple(rows), witness, gap > 10 * ANISOTROPY_TOL)
