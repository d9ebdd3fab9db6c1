# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Jacobi-flow propagator; same contract as ``_fallback.propagate``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, pow, ceil

cnp.import_array()

cdef double[7][6] A_ = [
    [0, 0, 0, 0, 0, 0],
    [0.2, 0, 0, 0, 0, 0],
    [3.0 / 40, 9.0 / 40, 0, 0, 0, 0],
    [44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0],
    [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0],
    [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0],
    [35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84],
]
cdef double[7] E_ = [
    35.0 / 384 - 5179.0 / 57600,
    0.0,
    500.0 / 1113 - 7571.0 / 16695,
    125.0 / 192 - 393.0 / 640,
    -2187.0 / 6784 + 92097.0 / 339200,
    11.0 / 84 - 187.0 / 2100,
    -1.0 / 40,
]


cdef void _rhs(const double[:, :, ::1] conn, const double[:, :, :, ::1] curv,
               const double[:, ::1] jmat, const double[::1] z0,
               double[::1] gd, double[:, ::1] G, double[:, ::1] K,
               const double[::1] s, double[::1] out, int p, int q, int m) noexcept nogil:
    cdef int n = p + q
    cdef int i, j, k, l, c
    cdef int oy = q
    cdef int op = q + n * m
    cdef double acc, gj
    for i in range(p):
        gd[i] = z0[i]
    for i in range(q):
        gd[p + i] = s[i]
    # w' = J w
    for i in range(q):
        acc = 0.0
        for j in range(q):
            acc = acc + jmat[i, j] * s[j]
        out[i] = acc
    # G[j, k] = sum_i gd_i conn[i, j, k]
    for j in range(n):
        for k in range(n):
            G[j, k] = 0.0
    for i in range(n):
        if gd[i] != 0.0:
            for j in range(n):
                for k in range(n):
                    G[j, k] = G[j, k] + gd[i] * conn[i, j, k]
    # K[l, i] = sum_{j,k} gd_j gd_k curv[i, j, k, l]
    for l in range(n):
        for i in range(n):
            K[l, i] = 0.0
    for i in range(n):
        for j in range(n):
            gj = gd[j]
            if gj == 0.0:
                continue
            for k in range(n):
                if gd[k] == 0.0:
                    continue
                for l in range(n):
                    K[l, i] = K[l, i] + gj * gd[k] * curv[i, j, k, l]
    # Y' = P - G^T Y ; P' = -K Y - G^T P
    for k in range(n):
        for c in range(m):
            acc = s[op + k * m + c]
            for j in range(n):
                acc = acc - G[j, k] * s[oy + j * m + c]
            out[oy + k * m + c] = acc
            acc = 0.0
            for j in range(n):
                acc = acc - K[k, j] * s[oy + j * m + c] - G[j, k] * s[op + j * m + c]
            out[op + k * m + c] = acc


def propagate(conn, curv, jmat, z0, double t_start, state, t_out, int method,
              double rtol, double atol, double h_init, long max_steps):
    cdef const double[:, :, ::1] cv = np.ascontiguousarray(conn, dtype=np.float64)
    cdef const double[:, :, :, ::1] rv = np.ascontiguousarray(curv, dtype=np.float64)
    cdef const double[:, ::1] jv = np.ascontiguousarray(jmat, dtype=np.float64)
    cdef const double[::1] zv = np.ascontiguousarray(z0, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(t_out, dtype=np.float64)
    cdef int p = zv.shape[0]
    cdef int q = jv.shape[0]
    cdef int n = p + q
    cdef Py_ssize_t dim = len(state)
    cdef int m = <int>((dim - q) // (2 * n))
    cdef Py_ssize_t nout = tv.shape[0]

    y_arr = np.array(state, dtype=np.float64)
    out_arr = np.empty((nout, dim), dtype=np.float64)
    cdef double[::1] y = y_arr
    cdef double[:, ::1] out = out_arr
    cdef double[:, ::1] kk = np.empty((7, dim), dtype=np.float64)
    cdef double[::1] ys = np.empty(dim, dtype=np.float64)
    cdef double[::1] gd = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] G = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] K = np.empty((n, n), dtype=np.float64)

    cdef double t = t_start
    cdef double h = h_init
    cdef double hh, span, target, enorm, sc, e, fac, a, b
    cdef long nsteps = 0
    cdef int status = 0
    cdef Py_ssize_t idx, i
    cdef int s, r, nsub, it, last

    with nogil:
        if method == 1:
            for idx in range(nout):
                target = tv[idx]
                span = target - t
                nsub = 0
                if span > 0:
                    nsub = <int>ceil(span / h - 1e-12)
                    if nsub < 1:
                        nsub = 1
                hh = span / nsub if nsub > 0 else 0.0
                for it in range(nsub):
                    _rhs(cv, rv, jv, zv, gd, G, K, y, kk[0], p, q, m)
                    for i in range(dim):
                        ys[i] = y[i] + 0.5 * hh * kk[0, i]
                    _rhs(cv, rv, jv, zv, gd, G, K, ys, kk[1], p, q, m)
                    for i in range(dim):
                        ys[i] = y[i] + 0.5 * hh * kk[1, i]
                    _rhs(cv, rv, jv, zv, gd, G, K, ys, kk[2], p, q, m)
                    for i in range(dim):
                        ys[i] = y[i] + hh * kk[2, i]
                    _rhs(cv, rv, jv, zv, gd, G, K, ys, kk[3], p, q, m)
                    for i in range(dim):
                        y[i] = y[i] + (hh / 6.0) * (kk[0, i] + 2.0 * kk[1, i] + 2.0 * kk[2, i] + kk[3, i])
                    nsteps += 1
                t = target
                for i in range(dim):
                    out[idx, i] = y[i]
        else:
            _rhs(cv, rv, jv, zv, gd, G, K, y, kk[0], p, q, m)
            for idx in range(nout):
                target = tv[idx]
                while t < target:
                    if nsteps >= max_steps:
                        status = 2
                        break
                    if h < 1e-14 * (fabs(t) if fabs(t) > 1.0 else 1.0):
                        status = 1
                        break
                    last = h >= target - t
                    hh = target - t if last else h
                    for s in range(1, 7):
                        for i in range(dim):
                            ys[i] = y[i]
                        for r in range(s):
                            if A_[s][r] != 0.0:
                                for i in range(dim):
                                    ys[i] = ys[i] + (hh * A_[s][r]) * kk[r, i]
                        _rhs(cv, rv, jv, zv, gd, G, K, ys, kk[s], p, q, m)
                    # one scale for the whole state, as in the fallback
                    a = 0.0
                    for i in range(dim):
                        b = fabs(y[i])
                        if b > a:
                            a = b
                        b = fabs(ys[i])
                        if b > a:
                            a = b
                    sc = atol + rtol * a
                    enorm = 0.0
                    for i in range(dim):
                        e = 0.0
                        for r in range(7):
                            if E_[r] != 0.0:
                                e = e + (hh * E_[r]) * kk[r, i]
                        enorm = enorm + (e / sc) * (e / sc)
                    enorm = sqrt(enorm / dim)
                    nsteps += 1
                    if enorm <= 1.0:
                        t = target if last else t + hh
                        for i in range(dim):
                            y[i] = ys[i]
                            kk[0, i] = kk[6, i]
                        if enorm == 0.0:
                            fac = 5.0
                        else:
                            fac = 0.9 * pow(enorm, -0.2)
                            if fac > 5.0:
                                fac = 5.0
                            if fac < 0.2:
                                fac = 0.2
                        if not last or fac < 1.0:
                            h = hh * fac
                    else:
                        fac = 0.9 * pow(enorm, -0.2)
                        if fac < 0.2:
                            fac = 0.2
                        h = hh * fac
                if status != 0:
                    break
                for i in range(dim):
                    out[idx, i] = y[i]
    return out_arr, status, nsteps
