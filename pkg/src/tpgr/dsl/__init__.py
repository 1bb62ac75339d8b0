"""Metric expression language: trees, documents, and exact 2-jets."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..errors import DomainError
from .expr import Expr, evaluate_values, to_source
from .jet import DOMAIN_MESSAGES, Jet2
from .parser import parse_expression, parse_metric_document, serialize_metric_document
from .spec import SLOTS, Chart, Interval, MetricSpec, sym_index
from .tape import MetricTape, compile_tape

__all__ = [
    "Chart", "Expr", "Interval", "Jet2", "MetricSpec", "MetricTape", "SLOTS",
    "compile_tape", "eval_jet2", "eval_tape", "evaluate_values", "fd_derivatives",
    "jet_fd_agreement", "parse_expression", "parse_metric_document",
    "serialize_metric_document", "sym_index", "to_source",
]


def _param_names(expr: Expr, params: Mapping[str, float]) -> tuple[str, ...]:
    from .expr import params_used

    used = params_used(expr)
    missing = used - set(params)
    if missing:
        raise KeyError(f"no value for parameter(s) {sorted(missing)}")
    return tuple(sorted(used))


def eval_tape(tape: MetricTape, point: Sequence[float], params: Mapping[str, float]) -> np.ndarray:
    """Run a compiled tape at ``point``; returns an (n_exprs, 15) jet array.

    Raises :class:`DomainError` naming the offending sub-expression.
    """
    from .. import _backend

    pt = np.ascontiguousarray(point, dtype=np.float64)
    if pt.shape != (4,):
        raise ValueError(f"a point needs 4 coordinates, got shape {pt.shape}")
    jets, status, pc = _backend.get().eval_tapes(
        tape.ops, tape.args, tape.consts, tape.starts, pt,
        tape.param_vector(params), tape.stack_size)
    if status:
        raise DomainError(DOMAIN_MESSAGES[status], subexpr=to_source(tape.nodes[pc]), point=pt)
    return jets


def eval_jet2(expr: Expr, point: Sequence[float], params: Mapping[str, float] | None = None) -> Jet2:
    """Value, gradient and Hessian of ``expr`` at ``point``, exact up to rounding."""
    params = dict(params or {})
    tape = compile_tape([expr], _param_names(expr, params))
    return Jet2.from_list(eval_tape(tape, point, params)[0])


def fd_derivatives(expr: Expr, point: Sequence[float], params: Mapping[str, float],
                   step: float, richardson: bool = True) -> np.ndarray:
    """Central-difference estimate of the 15-slot jet of ``expr``.

    With ``richardson`` the estimates at ``step`` and ``step/2`` are combined
    as ``D(h/2) + (D(h/2) - D(h)) / 3``.
    """
    x0 = np.asarray(point, dtype=float)

    def stencil(h):
        pts = [x0]
        for i in range(4):
            e = np.zeros(4)
            e[i] = h
            pts += [x0 + e, x0 - e]
        for i, j in SLOTS:
            if i == j:
                continue
            ei = np.zeros(4)
            ej = np.zeros(4)
            ei[i] = h
            ej[j] = h
            pts += [x0 + ei + ej, x0 + ei - ej, x0 - ei + ej, x0 - ei - ej]
        return np.array(pts)

    def estimate(h):
        f = evaluate_values(expr, stencil(h), params)
        out = np.empty(15)
        out[0] = f[0]
        for i in range(4):
            out[1 + i] = (f[1 + 2 * i] - f[2 + 2 * i]) / (2 * h)
        k = 9
        for s, (i, j) in enumerate(SLOTS):
            if i == j:
                out[5 + s] = (f[1 + 2 * i] - 2 * f[0] + f[2 + 2 * i]) / (h * h)
            else:
                out[5 + s] = (f[k] - f[k + 1] - f[k + 2] + f[k + 3]) / (4 * h * h)
                k += 4
        return out

    coarse = estimate(step)
    if not richardson:
        return coarse
    fine = estimate(step / 2)
    return fine + (fine - coarse) / 3.0


def jet_fd_agreement(expr: Expr, point: Sequence[float], params: Mapping[str, float] | None,
                     step: float = 1e-4) -> float:
    """Max over the 14 derivative slots of ``|jet - fd| / (1 + |jet|)``."""
    params = dict(params or {})
    jet = np.array(eval_jet2(expr, point, params).to_list())
    fd = fd_derivatives(expr, point, params, step)
    return float(np.max(np.abs(jet[1:] - fd[1:]) / (1.0 + np.abs(jet[1:]))))
