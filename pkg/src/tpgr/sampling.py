"""Seeded sample points for audits, kept away from each metric's singular sets."""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from .catalog.identities import THETA_BAND, sample_regular_points
from .dsl.spec import MetricSpec
from .errors import DomainError
from .geometry import metric_at

EDGE_BAND = 0.05
UNBOUNDED_WINDOW = 5.0
TILDE_L_BAND = 0.05

# Per-metric sampling boxes: (lo, hi) for each coordinate.
_BOXES = {
    "minkowski": lambda p: [(-5.0, 5.0)] * 4,
    "schwarzschild": lambda p: [(0.0, 10.0), (2 * p["mu"] + 0.5, 20.0),
                                (THETA_BAND, math.pi - THETA_BAND), (0.0, 2 * math.pi)],
    "time-periodic-tilde": lambda p: [(0.0, 4 * math.pi), (-2.0, 2.0),
                                      (THETA_BAND, math.pi - THETA_BAND), (0.0, 2 * math.pi)],
}


def _generic_box(spec: MetricSpec, params: Mapping[str, float]) -> list[tuple[float, float]]:
    box = []
    for iv in spec.chart.intervals:
        if iv is None:
            box.append((-UNBOUNDED_WINDOW, UNBOUNDED_WINDOW))
            continue
        lo, hi = iv.bounds(params)
        if math.isinf(lo) and math.isinf(hi):
            lo, hi = -UNBOUNDED_WINDOW, UNBOUNDED_WINDOW
        elif math.isinf(hi):
            hi = lo + 2 * UNBOUNDED_WINDOW
        elif math.isinf(lo):
            lo = hi - 2 * UNBOUNDED_WINDOW
        band = min(EDGE_BAND, 0.25 * (hi - lo))
        box.append((lo + band, hi - band))
    return box


def _usable(spec: MetricSpec, params, point) -> bool:
    if spec.name == "time-periodic-tilde":
        tau, rt = point[0], point[1]
        if abs(rt + tau + params["eps"] * math.sin(tau)) < TILDE_L_BAND:
            return False
    try:
        metric_at(spec, params, point)
    except DomainError:
        return False
    return True


def sample_points(spec: MetricSpec, params: Mapping[str, float] | None, n: int,
                  seed: int) -> np.ndarray:
    """``n`` points in the metric's chart at which the metric is regular.

    The polar time-periodic metric reuses the identity-suite sampler so the
    two suites see the same points for the same seed.
    """
    if n < 1:
        raise ValueError("sample count must be at least 1")
    p = spec.resolve_params(params)
    if spec.name == "time-periodic":
        return sample_regular_points(p, n, seed)
    box = _BOXES.get(spec.name, lambda q: _generic_box(spec, q))(p)
    rng = np.random.default_rng(seed)
    out: list[np.ndarray] = []
    attempts = 0
    while len(out) < n:
        pt = np.array([rng.uniform(lo, hi) for lo, hi in box])
        attempts += 1
        if _usable(spec, p, pt):
            out.append(pt)
        elif attempts > 100 * n + 1000:
            raise DomainError(f"could not find {n} regular sample points ({len(out)} found)")
    return np.array(out)
