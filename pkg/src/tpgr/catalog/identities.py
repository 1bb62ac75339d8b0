"""Helper scalars of the time-periodic metric and the checks built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from ..dsl import eval_tape
from ..dsl.expr import evaluate_values
from ..dsl.jet import Jet2
from ..dsl.tape import compile_tape
from ..geometry import metric_at
from .metrics import helper_expr, time_periodic_polar, time_periodic_tilde

HELPERS = ("G", "K", "M", "Q", "omega_plus", "omega_minus")

# Sampling domain for the identity and signature suites. The bands keep the
# samples a fixed distance away from the singular sets r = m, theta = 0, pi
# and K = 0.
THETA_BAND = 0.05
R_RANGE = (0.1, 10.0)
R_M_BAND = 0.05
K_BAND = 0.05
T_RANGE = (0.0, 4 * math.pi)


@dataclass(frozen=True)
class TimePeriodicForms:
    G: float
    K: float
    M: float
    Q: float
    omega_plus: float
    omega_minus: float
    omega_tilde: float | None  # exp(t/m) + m, i.e. the tilde-chart scalar at tau + rt = t


@lru_cache(maxsize=1)
def _helper_tape():
    return compile_tape([helper_expr(h) for h in HELPERS], ("eps", "m"))


def _pp(params: Mapping[str, float]) -> dict[str, float]:
    return {"eps": float(params["eps"]), "m": float(params["m"])}


def helper_jets(params: Mapping[str, float], point: Sequence[float]) -> dict[str, Jet2]:
    """Exact 2-jets of every helper scalar at a polar-chart point."""
    jets = eval_tape(_helper_tape(), point, _pp(params))
    return {h: Jet2.from_list(row) for h, row in zip(HELPERS, jets)}


def helpers_at(params: Mapping[str, float], point: Sequence[float]) -> TimePeriodicForms:
    p = _pp(params)
    j = helper_jets(p, point)
    m = p["m"]
    tilde = None
    if m != 0:
        try:
            tilde = math.exp(point[0] / m) + m
        except OverflowError:
            tilde = math.inf
    return TimePeriodicForms(omega_tilde=tilde, **{h: j[h].value for h in HELPERS})


# -- identities ------------------------------------------------------------------
# Index shorthands for the polar chart (t, r, theta, phi).
_T, _R, _TH = 0, 1, 2

IDENTITY_NAMES = (
    "K_t = (G-1)/(2M)",
    "K_tt = G_t/(2M)",
    "omega+_theta = omega-/(2 sin)",
    "omega-_theta = omega+/(2 sin)",
    "M_theta = Q",
    "G_r = -G_t",
    "G_rt = -G_tt",
    "G_theta_r = -G_theta_t",
    "K_t + K_r = r/(r-m)",
    "K_tr = -K_tt",
    "K_theta_r = -K_t_theta",
    "Q_theta = Q cot - 3 omega+/(4 sin)",
    "Q K_t = G_theta/2",
    "G_theta_theta = 2 K_t Q_theta",
    "trig identity = -sin^2",
    "2Q cot - 3 omega+/(4 sin) - (1+Q^2)/M = -M",
)


@dataclass(frozen=True)
class IdentityResiduals:
    """Left-minus-right of each helper identity, in :data:`IDENTITY_NAMES` order."""

    values: tuple[float, ...]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(IDENTITY_NAMES, self.values))

    def max_abs(self) -> float:
        return max(abs(v) for v in self.values)

    def failures(self, tol: float) -> list[str]:
        return [n for n, v in zip(IDENTITY_NAMES, self.values) if not abs(v) <= tol]


def residuals_from_jets(j: Mapping[str, Jet2], r: float, theta: float, m: float) -> IdentityResiduals:
    """Evaluate every identity from helper jets (tests may pass perturbed jets)."""
    G, K, M, Q = j["G"], j["K"], j["M"], j["Q"]
    op, om = j["omega_plus"], j["omega_minus"]
    s, c = math.sin(theta), math.cos(theta)
    cot = c / s
    Kt = K.grad[_T]
    vals = (
        Kt - (G.value - 1.0) / (2.0 * M.value),
        K.d2(_T, _T) - G.grad[_T] / (2.0 * M.value),
        op.grad[_TH] - om.value / (2.0 * s),
        om.grad[_TH] - op.value / (2.0 * s),
        M.grad[_TH] - Q.value,
        G.grad[_R] + G.grad[_T],
        G.d2(_R, _T) + G.d2(_T, _T),
        G.d2(_TH, _R) + G.d2(_TH, _T),
        Kt + K.grad[_R] - r / (r - m),
        K.d2(_T, _R) + K.d2(_T, _T),
        K.d2(_TH, _R) + K.d2(_T, _TH),
        Q.grad[_TH] - (Q.value * cot - 3.0 * op.value / (4.0 * s)),
        Q.value * Kt - 0.5 * G.grad[_TH],
        G.d2(_TH, _TH) - 2.0 * Kt * Q.grad[_TH],
        (2.0 * Q.value * c / op.value - 0.75 - Q.value ** 2 / op.value ** 2
         - 1.0 / op.value ** 2 + s * s),
        2.0 * Q.value * cot - 0.75 * op.value / s - (1.0 + Q.value ** 2) / M.value + M.value,
    )
    return IdentityResiduals(tuple(float(v) for v in vals))


def property1_residuals(params: Mapping[str, float], point: Sequence[float]) -> IdentityResiduals:
    p = _pp(params)
    return residuals_from_jets(helper_jets(p, point), point[1], point[2], p["m"])


# -- sampling ------------------------------------------------------------------------

def sample_regular_points(params: Mapping[str, float], n: int, seed: int) -> np.ndarray:
    """``n`` seeded polar points away from every singular set (rejection sampling)."""
    p = _pp(params)
    rng = np.random.default_rng(seed)
    K = helper_expr("K")
    out = np.empty((0, 4))
    while len(out) < n:
        batch = max(64, 2 * (n - len(out)))
        pts = np.column_stack([
            rng.uniform(*T_RANGE, batch),
            rng.uniform(*R_RANGE, batch),
            rng.uniform(THETA_BAND, math.pi - THETA_BAND, batch),
            rng.uniform(0.0, 2 * math.pi, batch),
        ])
        pts = pts[np.abs(pts[:, 1] - p["m"]) >= R_M_BAND]
        pts = pts[np.abs(evaluate_values(K, pts, p)) >= K_BAND]
        out = np.vstack([out, pts])
    return out[:n]


def g00_bound_check(params: Mapping[str, float], samples: int = 10_000, seed: int = 42) -> float:
    """Minimum of g00 = G over seeded samples of (t, r, theta)."""
    p = _pp(params)
    rng = np.random.default_rng(seed)
    pts = np.column_stack([
        rng.uniform(*T_RANGE, samples),
        rng.uniform(*R_RANGE, samples),
        rng.uniform(THETA_BAND, math.pi - THETA_BAND, samples),
        np.zeros(samples),
    ])
    return float(np.min(evaluate_values(helper_expr("G"), pts, p)))


def g00_lower_bound(eps: float) -> float:
    return 1.0 - 8.0 * abs(eps)


def periodicity_check(params: Mapping[str, float], point: Sequence[float],
                      shift: float = 2 * math.pi) -> float:
    """Max componentwise |g(t + shift) - g(t)| of the polar metric."""
    spec = time_periodic_polar(**_pp(params))
    a = metric_at(spec, None, point).g
    q = np.array(point, dtype=float)
    q[0] += shift
    b = metric_at(spec, None, q).g
    return float(np.max(np.abs(a - b)))


# -- pullback ----------------------------------------------------------------------

@dataclass(frozen=True)
class PullbackAudit:
    tilde_point: tuple[float, ...]
    polar_point: tuple[float, ...]
    jacobian: np.ndarray
    pulled_back: np.ndarray  # J^T g(polar point) J
    tilde_metric: np.ndarray
    discrepancy: np.ndarray  # pulled_back - tilde_metric

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.discrepancy)))


def tilde_to_polar(m: float, tilde_point: Sequence[float]) -> tuple[float, float, float, float]:
    tau, rt, th, ph = (float(x) for x in tilde_point)
    s = tau + rt
    return s, m + math.exp(s / m), th, ph


def pullback_audit(params: Mapping[str, float], tilde_point: Sequence[float]) -> PullbackAudit:
    """Pull the polar metric back through the coordinate map and compare with
    the tilde-chart metric. Differences are reported, not judged."""
    p = _pp(params)
    m = p["m"]
    if not m > 0:
        raise ValueError("the pullback map needs m > 0")
    x = tilde_to_polar(m, tilde_point)
    dr = (x[1] - m) / m
    jac = np.array([
        [1.0, 1.0, 0.0, 0.0],
        [dr, dr, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
    g = metric_at(time_periodic_polar(**p), None, x).g
    gt = metric_at(time_periodic_tilde(**p), None, tilde_point, allow_singular=True).g
    pulled = jac.T @ g @ jac
    return PullbackAudit(tuple(float(v) for v in tilde_point), x, jac, pulled, gt, pulled - gt)
