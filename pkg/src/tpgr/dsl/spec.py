"""Charts and metric specifications."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from ..errors import OutsideChartError
from .expr import ZERO, Expr, evaluate_values, is_zero, params_used, to_source

# Upper-triangle slot order; also the Hessian storage order of a 2-jet.
SLOTS: tuple[tuple[int, int], ...] = tuple((i, j) for i in range(4) for j in range(i, 4))
_SLOT_INDEX = {s: k for k, s in enumerate(SLOTS)}


def sym_index(i: int, j: int) -> int:
    """Position of the unordered pair (i, j) in :data:`SLOTS`."""
    return _SLOT_INDEX[(i, j) if i <= j else (j, i)]


@dataclass(frozen=True)
class Interval:
    lo: Expr
    hi: Expr
    lo_open: bool = True
    hi_open: bool = True

    def bounds(self, params: Mapping[str, float]) -> tuple[float, float]:
        import numpy as np

        z = np.zeros((1, 4))
        lo = float(evaluate_values(self.lo, z, params)[0])
        hi = float(evaluate_values(self.hi, z, params)[0])
        return lo, hi

    def contains(self, x: float, params: Mapping[str, float]) -> bool:
        lo, hi = self.bounds(params)
        above = x > lo if self.lo_open else x >= lo
        below = x < hi if self.hi_open else x <= hi
        return above and below

    def to_source(self) -> str:
        lb = "(" if self.lo_open else "["
        rb = ")" if self.hi_open else "]"
        return f"{lb}{to_source(self.lo)}, {to_source(self.hi)}{rb}"


@dataclass(frozen=True)
class Chart:
    names: tuple[str, str, str, str]
    intervals: tuple[Interval | None, Interval | None, Interval | None, Interval | None] = (
        None, None, None, None)

    def __post_init__(self):
        if len(self.names) != 4:
            raise ValueError(f"a chart needs 4 coordinates, got {len(self.names)}")
        if len(set(self.names)) != 4:
            raise ValueError(f"coordinate names must be distinct: {self.names}")
        if len(self.intervals) != 4:
            raise ValueError("intervals must have 4 entries")

    def index(self, name: str) -> int:
        return self.names.index(name)

    def check(self, point: Sequence[float], params: Mapping[str, float]) -> None:
        """Raise :class:`OutsideChartError` if ``point`` leaves a validity interval."""
        for k, (x, iv) in enumerate(zip(point, self.intervals)):
            if not math.isfinite(x):
                raise OutsideChartError(f"coordinate {self.names[k]} is not finite", point=point)
            if iv is not None and not iv.contains(x, params):
                raise OutsideChartError(
                    f"coordinate {self.names[k]} = {x:.17g} outside {iv.to_source()}", point=point)


@dataclass(frozen=True)
class MetricSpec:
    """A symmetric 4x4 metric given by one expression per unordered index pair."""

    chart: Chart
    components: tuple[Expr, ...]  # 10 entries in SLOTS order
    parameters: tuple[tuple[str, float], ...] = ()
    name: str | None = None

    def __post_init__(self):
        if len(self.components) != 10:
            raise ValueError("a metric spec needs exactly 10 component slots")
        declared = {p for p, _ in self.parameters}
        for e in self.components:
            missing = params_used(e) - declared
            if missing:
                raise ValueError(f"undeclared parameter(s): {sorted(missing)}")

    @classmethod
    def from_matrix(cls, chart: Chart, entries: Mapping[tuple[int, int], Expr],
                    parameters=(), name=None) -> "MetricSpec":
        comps = [ZERO] * 10
        for (i, j), e in entries.items():
            comps[sym_index(i, j)] = e
        return cls(chart, tuple(comps), tuple(parameters), name)

    def component(self, i: int, j: int) -> Expr:
        return self.components[sym_index(i, j)]

    def zero_slots(self) -> set[tuple[int, int]]:
        return {s for s, e in zip(SLOTS, self.components) if is_zero(e)}

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.parameters)

    def resolve_params(self, overrides: Mapping[str, float] | None = None) -> dict[str, float]:
        """Defaults merged with ``overrides``; unknown override names are rejected."""
        out = dict(self.parameters)
        for k, v in (overrides or {}).items():
            if k not in out:
                raise KeyError(f"metric has no parameter '{k}'")
            out[k] = float(v)
        return out

    def with_params(self, **values: float) -> "MetricSpec":
        params = self.resolve_params(values)
        return MetricSpec(self.chart, self.components,
                          tuple((k, params[k]) for k, _ in self.parameters), self.name)

