"""Pure-Python/numpy implementations of the hot kernels.

Same contract as the compiled ``_kernels`` module; selected by
:mod:`tpgr._backend` when the extension is unavailable.
"""

from __future__ import annotations

import math

import numpy as np

from .dsl import jet as J
from .dsl.spec import SLOTS
from .dsl.tape import (OP_ABS, OP_ADD, OP_ASIN, OP_CONST, OP_COORD, OP_COS, OP_DIV,
                       OP_EXP, OP_FN, OP_LN, OP_MUL, OP_NEG, OP_PARAM, OP_POW, OP_SIN,
                       OP_SQRT, OP_SUB, OP_TAN)

NAME = "python"

# slot index of every ordered pair
_SYM = np.empty((4, 4), dtype=np.intp)
for _k, (_i, _j) in enumerate(SLOTS):
    _SYM[_i, _j] = _SYM[_j, _i] = _k


def eval_tapes(ops, args, consts, starts, point, params, stack_size):
    """Evaluate every expression tape at ``point``.

    Returns ``(jets, status, failed_instruction)`` where ``jets`` has shape
    (n_exprs, 15) and a nonzero status is a code from ``jet.DOMAIN_MESSAGES``.
    """
    n = len(starts) - 1
    out = np.zeros((n, 15))
    ops = ops.tolist()
    args = args.tolist()
    consts = consts.tolist()
    point = [float(x) for x in point]
    params = [float(x) for x in params]
    for e in range(n):
        lo, hi = int(starts[e]), int(starts[e + 1])
        if lo == hi:
            continue
        stack = []
        for pc in range(lo, hi):
            op = ops[pc]
            if op == OP_CONST:
                stack.append(J.constant(consts[args[pc]]))
            elif op == OP_COORD:
                stack.append(J.variable(point[args[pc]], args[pc]))
            elif op == OP_PARAM:
                stack.append(J.constant(params[args[pc]]))
            elif op <= OP_DIV:
                b = stack.pop()
                a = stack.pop()
                if op == OP_ADD:
                    r = J.add(a, b)
                elif op == OP_SUB:
                    r = J.sub(a, b)
                elif op == OP_MUL:
                    r = J.mul(a, b)
                else:
                    if b[0] == 0.0:
                        return out, 1, pc
                    r = J.mul(a, J.reciprocal(b))
                stack.append(r)
            elif op == OP_NEG:
                stack.append(J.negate(stack.pop()))
            elif op == OP_POW:
                a = stack.pop()
                p = consts[args[pc]]
                x = a[0]
                if (p != math.floor(p) and not x > 0.0) or (p < 0.0 and x == 0.0):
                    return out, 6, pc
                stack.append(J.unary(a, *J.power_derivs(x, p)))
            else:
                a = stack.pop()
                f = J.fn_derivs(OP_FN[op], a[0])
                if isinstance(f, int):
                    return out, f, pc
                stack.append(J.unary(a, *f))
            top = stack[-1]
            if not all(map(math.isfinite, top)):
                return out, 8, pc
        out[e, :] = stack[0]
    return out, 0, -1


def det_inv4(a):
    """Determinant and symmetrized inverse of a 4x4 matrix by cofactor expansion.

    ``inv`` is None when the determinant is exactly zero.
    """
    a00, a01, a02, a03 = a[0]
    a10, a11, a12, a13 = a[1]
    a20, a21, a22, a23 = a[2]
    a30, a31, a32, a33 = a[3]
    s0 = a00 * a11 - a10 * a01
    s1 = a00 * a12 - a10 * a02
    s2 = a00 * a13 - a10 * a03
    s3 = a01 * a12 - a11 * a02
    s4 = a01 * a13 - a11 * a03
    s5 = a02 * a13 - a12 * a03
    c5 = a22 * a33 - a32 * a23
    c4 = a21 * a33 - a31 * a23
    c3 = a21 * a32 - a31 * a22
    c2 = a20 * a33 - a30 * a23
    c1 = a20 * a32 - a30 * a22
    c0 = a20 * a31 - a30 * a21
    det = s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
    if det == 0.0:
        return det, None
    b = np.array([
        [a11 * c5 - a12 * c4 + a13 * c3, -a01 * c5 + a02 * c4 - a03 * c3,
         a31 * s5 - a32 * s4 + a33 * s3, -a21 * s5 + a22 * s4 - a23 * s3],
        [-a10 * c5 + a12 * c2 - a13 * c1, a00 * c5 - a02 * c2 + a03 * c1,
         -a30 * s5 + a32 * s2 - a33 * s1, a20 * s5 - a22 * s2 + a23 * s1],
        [a10 * c4 - a11 * c2 + a13 * c0, -a00 * c4 + a01 * c2 - a03 * c0,
         a30 * s4 - a31 * s2 + a33 * s0, -a20 * s4 + a21 * s2 - a23 * s0],
        [-a10 * c3 + a11 * c1 - a12 * c0, a00 * c3 - a01 * c1 + a02 * c0,
         -a30 * s3 + a31 * s1 - a32 * s0, a20 * s3 - a21 * s1 + a22 * s0],
    ]) / det
    return det, 0.5 * (b + b.T)


def metric_from_jets(jets):
    """Return (g, ginv, det); ginv is None for an exactly singular matrix."""
    g = np.asarray(jets)[_SYM, 0]
    det, ginv = det_inv4(g)
    return g, ginv, det


def curvature_from_jets(jets):
    """Full curvature chain from the 10 component jets.

    Returns ``(g, ginv, det, gamma, dgamma, riemann_low, ricci, scalar,
    einstein, kretschmann)`` with index layouts

    * ``gamma[l, m, n]`` = Gamma^l_{mn}
    * ``dgamma[k, l, m, n]`` = d_k Gamma^l_{mn}
    * ``riemann_low[a, b, c, d]`` = R_{abcd}
    """
    jets = np.asarray(jets)
    g, ginv, det = metric_from_jets(jets)
    dg = np.moveaxis(jets[_SYM, 1:5], 2, 0)  # dg[c, a, b]
    hslot = _SYM[:, :] + 5
    # ddg[c, d, a, b] = d_c d_d g_ab
    ddg = np.empty((4, 4, 4, 4))
    for c in range(4):
        for d in range(4):
            ddg[c, d] = jets[_SYM, hslot[c, d]]
    # first-kind symbols G[k, m, n] and their derivatives
    gam1 = 0.5 * (np.einsum("mkn->kmn", dg) + np.einsum("nkm->kmn", dg) - dg)
    dgam1 = 0.5 * (np.einsum("smkn->skmn", ddg) + np.einsum("snkm->skmn", ddg)
                   - np.einsum("skmn->skmn", ddg))
    gamma = np.einsum("lk,kmn->lmn", ginv, gam1)
    dginv = -np.einsum("la,sab,bk->slk", ginv, dg, ginv)
    dgamma = np.einsum("slk,kmn->slmn", dginv, gam1) + np.einsum("lk,skmn->slmn", ginv, dgam1)
    # R^r_{s m n} = d_m G^r_{n s} - d_n G^r_{m s} + G^r_{m l} G^l_{n s} - G^r_{n l} G^l_{m s}
    riem_up = (np.einsum("mrns->rsmn", dgamma) - np.einsum("nrms->rsmn", dgamma)
               + np.einsum("rml,lns->rsmn", gamma, gamma)
               - np.einsum("rnl,lms->rsmn", gamma, gamma))
    riem_low = np.einsum("ar,rbcd->abcd", g, riem_up)
    ricci = np.einsum("msmn->sn", riem_up)
    ricci = 0.5 * (ricci + ricci.T)
    scalar = float(np.einsum("sn,sn->", ginv, ricci))
    einstein = ricci - 0.5 * g * scalar
    r_up = np.einsum("ai,bj,ck,dl,ijkl->abcd", ginv, ginv, ginv, ginv, riem_low, optimize=True)
    kretschmann = float(np.einsum("abcd,abcd->", r_up, riem_low))
    return g, ginv, det, gamma, dgamma, riem_low, ricci, scalar, einstein, kretschmann
