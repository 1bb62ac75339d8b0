"""Flatten expression trees into postfix tapes for the jet kernels.

A :class:`MetricTape` concatenates the tapes of the 10 metric slots so one
kernel call produces all component jets at a point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .expr import Binary, Const, Coord, Expr, Param, Unary, is_zero

OP_CONST, OP_COORD, OP_PARAM = 0, 1, 2
OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_NEG, OP_POW = 3, 4, 5, 6, 7, 8
OP_SIN, OP_COS, OP_TAN, OP_ASIN, OP_EXP, OP_LN, OP_ABS, OP_SQRT = 9, 10, 11, 12, 13, 14, 15, 16

FN_OPS = {"sin": OP_SIN, "cos": OP_COS, "tan": OP_TAN, "asin": OP_ASIN,
          "exp": OP_EXP, "ln": OP_LN, "abs": OP_ABS, "sqrt": OP_SQRT, "neg": OP_NEG}
OP_FN = {v: k for k, v in FN_OPS.items()}
BIN_OPS = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV}


@dataclass(frozen=True)
class MetricTape:
    ops: np.ndarray  # int32
    args: np.ndarray  # int32
    consts: np.ndarray  # float64
    starts: np.ndarray  # int32, len n_exprs + 1
    stack_size: int
    param_names: tuple[str, ...]
    nodes: tuple[Expr, ...]  # node that produced each instruction

    @property
    def n_exprs(self) -> int:
        return len(self.starts) - 1

    def param_vector(self, params) -> np.ndarray:
        return np.array([float(params[n]) for n in self.param_names], dtype=float)


def compile_tape(exprs: Sequence[Expr], param_names: Sequence[str]) -> MetricTape:
    ops: list[int] = []
    args: list[int] = []
    consts: list[float] = []
    nodes: list[Expr] = []
    starts = [0]
    pindex = {n: k for k, n in enumerate(param_names)}
    max_depth = 1

    def emit(op, arg, node):
        ops.append(op)
        args.append(arg)
        nodes.append(node)

    def rec(e: Expr, depth: int) -> None:
        nonlocal max_depth
        max_depth = max(max_depth, depth)
        if isinstance(e, Const):
            consts.append(e.value)
            emit(OP_CONST, len(consts) - 1, e)
        elif isinstance(e, Coord):
            emit(OP_COORD, e.index, e)
        elif isinstance(e, Param):
            emit(OP_PARAM, pindex[e.name], e)
        elif isinstance(e, Unary):
            rec(e.arg, depth)
            emit(FN_OPS[e.fn], 0, e)
        elif isinstance(e, Binary):
            if e.op == "^":
                rec(e.left, depth)
                consts.append(e.right.value)
                emit(OP_POW, len(consts) - 1, e)
            else:
                rec(e.left, depth)
                rec(e.right, depth + 1)
                emit(BIN_OPS[e.op], 0, e)
        else:  # pragma: no cover
            raise TypeError(e)

    for e in exprs:
        if not is_zero(e):
            rec(e, 1)
        starts.append(len(ops))
    return MetricTape(
        ops=np.asarray(ops, dtype=np.int32),
        args=np.asarray(args, dtype=np.int32),
        consts=np.asarray(consts if consts else [0.0], dtype=np.float64),
        starts=np.asarray(starts, dtype=np.int32),
        stack_size=max_depth + 1,
        param_names=tuple(param_names),
        nodes=tuple(nodes),
    )
