# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled jet-tape evaluator and curvature contraction.

Mirrors :mod:`tpgr._fallback` operation for operation.
"""

import numpy as np
from libc.math cimport sin, cos, tan, asin, exp, log, sqrt, pow, floor, isfinite
from libc.stdlib cimport malloc, free

NAME = "cython"

cdef enum:
    J = 15

# opcodes, kept in sync with tpgr.dsl.tape
cdef enum:
    OP_CONST = 0
    OP_COORD = 1
    OP_PARAM = 2
    OP_ADD = 3
    OP_SUB = 4
    OP_MUL = 5
    OP_DIV = 6
    OP_NEG = 7
    OP_POW = 8
    OP_SIN = 9
    OP_COS = 10
    OP_TAN = 11
    OP_ASIN = 12
    OP_EXP = 13
    OP_LN = 14
    OP_ABS = 15
    OP_SQRT = 16


cdef int PI_[10]
cdef int PJ_[10]
cdef int SYM_[4][4]


cdef void _init_tables():
    cdef int k = 0, i, j
    for i in range(4):
        for j in range(i, 4):
            PI_[k] = i
            PJ_[k] = j
            SYM_[i][j] = k
            SYM_[j][i] = k
            k += 1


_init_tables()


cdef inline void j_unary(double* out, const double* a, double f0, double f1, double f2) noexcept nogil:
    cdef int k
    cdef double g0 = a[1], g1 = a[2], g2 = a[3], g3 = a[4]
    cdef double g[4]
    g[0] = g0; g[1] = g1; g[2] = g2; g[3] = g3
    # hessian first: out may alias a
    for k in range(10):
        out[5 + k] = f2 * g[PI_[k]] * g[PJ_[k]] + f1 * a[5 + k]
    out[0] = f0
    out[1] = f1 * g0
    out[2] = f1 * g1
    out[3] = f1 * g2
    out[4] = f1 * g3


cdef inline void j_mul(double* out, const double* a, const double* b) noexcept nogil:
    # out must not alias a or b
    cdef int k, i, j
    cdef double av = a[0], bv = b[0]
    out[0] = av * bv
    for i in range(4):
        out[1 + i] = av * b[1 + i] + bv * a[1 + i]
    for k in range(10):
        i = PI_[k]
        j = PJ_[k]
        out[5 + k] = av * b[5 + k] + bv * a[5 + k] + (a[1 + i] * b[1 + j] + a[1 + j] * b[1 + i])


cdef int _fn_derivs(int op, double x, double* f) noexcept nogil:
    cdef double s, c, t, sec2, w, r
    if op == OP_SIN:
        s = sin(x); c = cos(x)
        f[0] = s; f[1] = c; f[2] = -s
    elif op == OP_COS:
        s = sin(x); c = cos(x)
        f[0] = c; f[1] = -s; f[2] = -c
    elif op == OP_TAN:
        c = cos(x)
        if c == 0.0:
            return 7
        t = tan(x)
        sec2 = 1.0 + t * t
        f[0] = t; f[1] = sec2; f[2] = 2.0 * t * sec2
    elif op == OP_ASIN:
        if not (-1.0 < x < 1.0):
            return 5
        w = 1.0 - x * x
        r = 1.0 / sqrt(w)
        f[0] = asin(x); f[1] = r; f[2] = x * r / w
    elif op == OP_EXP:
        s = exp(x)
        f[0] = s; f[1] = s; f[2] = s
    elif op == OP_LN:
        if not (x > 0.0):
            return 2
        f[0] = log(x); f[1] = 1.0 / x; f[2] = -1.0 / (x * x)
    elif op == OP_ABS:
        if x == 0.0:
            return 3
        if x > 0.0:
            f[0] = x; f[1] = 1.0
        else:
            f[0] = -x; f[1] = -1.0
        f[2] = 0.0
    elif op == OP_SQRT:
        if not (x > 0.0):
            return 4
        s = sqrt(x)
        f[0] = s; f[1] = 0.5 / s; f[2] = -0.25 / (x * s)
    return 0


cdef inline void _power_derivs(double x, double p, double* f) noexcept nogil:
    if p == 0.0:
        f[0] = 1.0; f[1] = 0.0; f[2] = 0.0
    elif p == 1.0:
        f[0] = x; f[1] = 1.0; f[2] = 0.0
    elif p == 2.0:
        f[0] = x * x; f[1] = 2.0 * x; f[2] = 2.0
    else:
        f[0] = pow(x, p); f[1] = p * pow(x, p - 1.0); f[2] = p * (p - 1.0) * pow(x, p - 2.0)


cdef int _run(const int* ops, const int* args, const double* consts, int lo, int hi,
              const double* point, const double* params, double* stack,
              double* out, int* failed) noexcept nogil:
    cdef int pc, op, sp = 0, k, status
    cdef double* top
    cdef double tmp[J]
    cdef double rec[J]
    cdef double f[3]
    cdef double x, p, r
    for pc in range(lo, hi):
        op = ops[pc]
        if op == OP_CONST or op == OP_PARAM or op == OP_COORD:
            top = stack + sp * J
            for k in range(J):
                top[k] = 0.0
            if op == OP_CONST:
                top[0] = consts[args[pc]]
            elif op == OP_PARAM:
                top[0] = params[args[pc]]
            else:
                top[0] = point[args[pc]]
                top[1 + args[pc]] = 1.0
            sp += 1
        elif op <= OP_DIV:
            sp -= 1
            top = stack + (sp - 1) * J
            if op == OP_ADD:
                for k in range(J):
                    top[k] = top[k] + top[J + k]
            elif op == OP_SUB:
                for k in range(J):
                    top[k] = top[k] - top[J + k]
            elif op == OP_MUL:
                j_mul(tmp, top, top + J)
                for k in range(J):
                    top[k] = tmp[k]
            else:
                x = top[J]
                if x == 0.0:
                    failed[0] = pc
                    return 1
                r = 1.0 / x
                j_unary(rec, top + J, r, -r * r, 2.0 * r * r * r)
                j_mul(tmp, top, rec)
                for k in range(J):
                    top[k] = tmp[k]
        elif op == OP_NEG:
            top = stack + (sp - 1) * J
            for k in range(J):
                top[k] = -top[k]
        elif op == OP_POW:
            top = stack + (sp - 1) * J
            p = consts[args[pc]]
            x = top[0]
            if (p != floor(p) and not (x > 0.0)) or (p < 0.0 and x == 0.0):
                failed[0] = pc
                return 6
            _power_derivs(x, p, f)
            j_unary(top, top, f[0], f[1], f[2])
        else:
            top = stack + (sp - 1) * J
            status = _fn_derivs(op, top[0], f)
            if status != 0:
                failed[0] = pc
                return status
            j_unary(top, top, f[0], f[1], f[2])
        top = stack + (sp - 1) * J
        for k in range(J):
            if not isfinite(top[k]):
                failed[0] = pc
                return 8
    for k in range(J):
        out[k] = stack[k]
    return 0


def eval_tapes(int[::1] ops, int[::1] args, double[::1] consts, int[::1] starts,
               double[::1] point, double[::1] params, int stack_size):
    """Evaluate every expression tape; see ``tpgr._fallback.eval_tapes``."""
    cdef Py_ssize_t n = starts.shape[0] - 1
    out_arr = np.zeros((n, J))
    cdef double[:, ::1] out = out_arr
    cdef double* stack = <double*> malloc(stack_size * J * sizeof(double))
    cdef int e, status = 0, failed = -1
    cdef const int* ops_p = &ops[0] if ops.shape[0] > 0 else NULL
    cdef const int* args_p = &args[0] if args.shape[0] > 0 else NULL
    cdef const double* params_p = &params[0] if params.shape[0] > 0 else NULL
    if stack == NULL:
        raise MemoryError()
    try:
        with nogil:
            for e in range(n):
                if starts[e] == starts[e + 1]:
                    continue
                status = _run(ops_p, args_p, &consts[0], starts[e], starts[e + 1],
                              &point[0], params_p, stack, &out[e, 0], &failed)
                if status != 0:
                    break
    finally:
        free(stack)
    return out_arr, status, failed


cdef double _det_inv4(const double* a, double* inv) noexcept nogil:
    # a, inv row-major 4x4; inv is symmetrized and left untouched when det == 0
    cdef double a00 = a[0], a01 = a[1], a02 = a[2], a03 = a[3]
    cdef double a10 = a[4], a11 = a[5], a12 = a[6], a13 = a[7]
    cdef double a20 = a[8], a21 = a[9], a22 = a[10], a23 = a[11]
    cdef double a30 = a[12], a31 = a[13], a32 = a[14], a33 = a[15]
    cdef double s0 = a00 * a11 - a10 * a01
    cdef double s1 = a00 * a12 - a10 * a02
    cdef double s2 = a00 * a13 - a10 * a03
    cdef double s3 = a01 * a12 - a11 * a02
    cdef double s4 = a01 * a13 - a11 * a03
    cdef double s5 = a02 * a13 - a12 * a03
    cdef double c5 = a22 * a33 - a32 * a23
    cdef double c4 = a21 * a33 - a31 * a23
    cdef double c3 = a21 * a32 - a31 * a22
    cdef double c2 = a20 * a33 - a30 * a23
    cdef double c1 = a20 * a32 - a30 * a22
    cdef double c0 = a20 * a31 - a30 * a21
    cdef double det = s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
    cdef double b[16]
    cdef int i, j
    if det == 0.0:
        return det
    b[0] = (a11 * c5 - a12 * c4 + a13 * c3) / det
    b[1] = (-a01 * c5 + a02 * c4 - a03 * c3) / det
    b[2] = (a31 * s5 - a32 * s4 + a33 * s3) / det
    b[3] = (-a21 * s5 + a22 * s4 - a23 * s3) / det
    b[4] = (-a10 * c5 + a12 * c2 - a13 * c1) / det
    b[5] = (a00 * c5 - a02 * c2 + a03 * c1) / det
    b[6] = (-a30 * s5 + a32 * s2 - a33 * s1) / det
    b[7] = (a20 * s5 - a22 * s2 + a23 * s1) / det
    b[8] = (a10 * c4 - a11 * c2 + a13 * c0) / det
    b[9] = (-a00 * c4 + a01 * c2 - a03 * c0) / det
    b[10] = (a30 * s4 - a31 * s2 + a33 * s0) / det
    b[11] = (-a20 * s4 + a21 * s2 - a23 * s0) / det
    b[12] = (-a10 * c3 + a11 * c1 - a12 * c0) / det
    b[13] = (a00 * c3 - a01 * c1 + a02 * c0) / det
    b[14] = (-a30 * s3 + a31 * s1 - a32 * s0) / det
    b[15] = (a20 * s3 - a21 * s1 + a22 * s0) / det
    for i in range(4):
        for j in range(4):
            inv[4 * i + j] = 0.5 * (b[4 * i + j] + b[4 * j + i])
    return det


def metric_from_jets(double[:, ::1] jets):
    """Return (g, ginv, det); ginv is None for an exactly singular matrix."""
    g_arr = np.empty((4, 4))
    ginv_arr = np.empty((4, 4))
    cdef double[:, ::1] g = g_arr
    cdef double[:, ::1] ginv = ginv_arr
    cdef int i, j
    for i in range(4):
        for j in range(4):
            g[i, j] = jets[SYM_[i][j], 0]
    cdef double det = _det_inv4(&g[0, 0], &ginv[0, 0])
    return g_arr, (ginv_arr if det != 0.0 else None), det


def curvature_from_jets(double[:, ::1] jets):
    """Full curvature chain; see ``tpgr._fallback.curvature_from_jets``."""
    g_arr, ginv_arr, det = metric_from_jets(jets)
    if ginv_arr is None:
        raise ZeroDivisionError("singular metric")
    cdef double[:, ::1] g = g_arr
    cdef double[:, ::1] ginv = ginv_arr
    gamma_arr = np.zeros((4, 4, 4))
    dgamma_arr = np.zeros((4, 4, 4, 4))
    riem_arr = np.zeros((4, 4, 4, 4))
    ricci_arr = np.zeros((4, 4))
    ein_arr = np.zeros((4, 4))
    cdef double[:, :, ::1] gamma = gamma_arr
    cdef double[:, :, :, ::1] dgamma = dgamma_arr
    cdef double[:, :, :, ::1] riem_low = riem_arr
    cdef double[:, ::1] ricci = ricci_arr
    cdef double[:, ::1] ein = ein_arr
    cdef double dg[4][4][4]        # dg[c][a][b]
    cdef double ddg[4][4][4][4]    # ddg[c][d][a][b]
    cdef double gam1[4][4][4]      # gam1[k][m][n]
    cdef double dgam1[4][4][4][4]  # dgam1[s][k][m][n]
    cdef double dginv[4][4][4]     # dginv[s][l][k]
    cdef double riem_up[4][4][4][4]
    cdef double tmp[4][4][4][4]
    cdef double tmp2[4][4][4][4]
    cdef int a, b, c, d, k, l, m, n, s, r
    cdef double acc, scalar, kret
    with nogil:
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    dg[c][a][b] = jets[SYM_[a][b], 1 + c]
                    for d in range(4):
                        ddg[c][d][a][b] = jets[SYM_[a][b], 5 + SYM_[c][d]]
        for k in range(4):
            for m in range(4):
                for n in range(4):
                    gam1[k][m][n] = 0.5 * (dg[m][k][n] + dg[n][k][m] - dg[k][m][n])
                    for s in range(4):
                        dgam1[s][k][m][n] = 0.5 * (ddg[s][m][k][n] + ddg[s][n][k][m] - ddg[s][k][m][n])
        for l in range(4):
            for m in range(4):
                for n in range(4):
                    acc = 0.0
                    for k in range(4):
                        acc = acc + ginv[l, k] * gam1[k][m][n]
                    gamma[l, m, n] = acc
        for s in range(4):
            for l in range(4):
                for k in range(4):
                    acc = 0.0
                    for a in range(4):
                        for b in range(4):
                            acc = acc + ginv[l, a] * dg[s][a][b] * ginv[b, k]
                    dginv[s][l][k] = -acc
        for s in range(4):
            for l in range(4):
                for m in range(4):
                    for n in range(4):
                        acc = 0.0
                        for k in range(4):
                            acc = acc + dginv[s][l][k] * gam1[k][m][n]
                        for k in range(4):
                            acc = acc + ginv[l, k] * dgam1[s][k][m][n]
                        dgamma[s, l, m, n] = acc
        for r in range(4):
            for s in range(4):
                for m in range(4):
                    for n in range(4):
                        acc = dgamma[m, r, n, s] - dgamma[n, r, m, s]
                        for l in range(4):
                            acc = acc + gamma[r, m, l] * gamma[l, n, s] - gamma[r, n, l] * gamma[l, m, s]
                        riem_up[r][s][m][n] = acc
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    for d in range(4):
                        acc = 0.0
                        for r in range(4):
                            acc = acc + g[a, r] * riem_up[r][b][c][d]
                        riem_low[a, b, c, d] = acc
        for s in range(4):
            for n in range(4):
                acc = 0.0
                for m in range(4):
                    acc = acc + riem_up[m][s][m][n]
                ricci[s, n] = acc
        for s in range(4):
            for n in range(s + 1, 4):
                acc = 0.5 * (ricci[s, n] + ricci[n, s])
                ricci[s, n] = acc
                ricci[n, s] = acc
        scalar = 0.0
        for s in range(4):
            for n in range(4):
                scalar = scalar + ginv[s, n] * ricci[s, n]
        for s in range(4):
            for n in range(4):
                ein[s, n] = ricci[s, n] - 0.5 * g[s, n] * scalar
        # raise all four indices one at a time
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    for d in range(4):
                        acc = 0.0
                        for r in range(4):
                            acc = acc + ginv[a, r] * riem_low[r, b, c, d]
                        tmp[a][b][c][d] = acc
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    for d in range(4):
                        acc = 0.0
                        for r in range(4):
                            acc = acc + ginv[b, r] * tmp[a][r][c][d]
                        tmp2[a][b][c][d] = acc
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    for d in range(4):
                        acc = 0.0
                        for r in range(4):
                            acc = acc + ginv[c, r] * tmp2[a][b][r][d]
                        tmp[a][b][c][d] = acc
        kret = 0.0
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    for d in range(4):
                        acc = 0.0
                        for r in range(4):
                            acc = acc + ginv[d, r] * tmp[a][b][c][r]
                        kret = kret + acc * riem_low[a, b, c, d]
    return (g_arr, ginv_arr, det, gamma_arr, dgamma_arr, riem_arr, ricci_arr,
            scalar, ein_arr, kret)
