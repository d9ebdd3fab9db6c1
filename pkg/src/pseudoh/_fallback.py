"""Pure numpy implementation of the Jacobi-flow propagator.

Mirrors ``_kernels.pyx`` step for step; used when the compiled extension is
not available.

State layout (flat): ``w`` (q) | ``Y`` (n x m, row-major) | ``P`` (n x m),
where ``w`` is the ``v`` part of the geodesic velocity, ``Y`` the Jacobi
fields and ``P`` their covariant derivatives, all in the left-invariant frame.
"""
from __future__ import annotations

import math

import numpy as np

# Dormand-Prince 5(4); the system is autonomous so the nodes c_i are not needed
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
E = (
    35 / 384 - 5179 / 57600,
    0.0,
    500 / 1113 - 7571 / 16695,
    125 / 192 - 393 / 640,
    -2187 / 6784 + 92097 / 339200,
    11 / 84 - 187 / 2100,
    -1 / 40,
)

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2


def rhs(conn, curv, jmat, z0, state, out):
    p = z0.shape[0]
    q = jmat.shape[0]
    n = p + q
    m = (state.shape[0] - q) // (2 * n)
    w = state[:q]
    Y = state[q : q + n * m].reshape(n, m)
    P = state[q + n * m :].reshape(n, m)
    gd = np.concatenate([z0, w])
    G = np.tensordot(gd, conn, axes=1)  # G[j, k]: (nabla_gd e_j)_k
    K = np.einsum("j,k,ijkl->li", gd, gd, curv, optimize=True)
    out[:q] = jmat @ w
    out[q : q + n * m] = (P - G.T @ Y).reshape(-1)
    out[q + n * m :] = (-K @ Y - G.T @ P).reshape(-1)
    return out


def propagate(conn, curv, jmat, z0, t_start, state, t_out, method, rtol, atol, h_init, max_steps):
    """Integrate from ``t_start`` through the ascending times ``t_out``.

    Returns ``(states, status, nsteps)`` with ``states[i]`` the state at
    ``t_out[i]``.  ``method`` 0 is adaptive Dormand-Prince 5(4); 1 is classic
    RK4 with a fixed step no larger than ``h_init``.
    """
    conn = np.ascontiguousarray(conn, dtype=float)
    curv = np.ascontiguousarray(curv, dtype=float)
    jmat = np.ascontiguousarray(jmat, dtype=float)
    z0 = np.ascontiguousarray(z0, dtype=float)
    y = np.array(state, dtype=float)
    t_out = np.asarray(t_out, dtype=float)
    out = np.empty((t_out.shape[0], y.shape[0]))
    dim = y.shape[0]
    k = np.empty((7, dim))
    t = float(t_start)
    h = float(h_init)
    nsteps = 0

    if method == 1:
        for idx, target in enumerate(t_out):
            span = target - t
            nsub = max(1, int(math.ceil(span / h - 1e-12))) if span > 0 else 0
            hh = span / nsub if nsub else 0.0
            for _ in range(nsub):
                rhs(conn, curv, jmat, z0, y, k[0])
                rhs(conn, curv, jmat, z0, y + 0.5 * hh * k[0], k[1])
                rhs(conn, curv, jmat, z0, y + 0.5 * hh * k[1], k[2])
                rhs(conn, curv, jmat, z0, y + hh * k[2], k[3])
                y = y + (hh / 6.0) * (k[0] + 2.0 * k[1] + 2.0 * k[2] + k[3])
                nsteps += 1
            t = target
            out[idx] = y
        return out, STATUS_OK, nsteps

    rhs(conn, curv, jmat, z0, y, k[0])
    for idx, target in enumerate(t_out):
        while t < target:
            if nsteps >= max_steps:
                return out, STATUS_MAX_STEPS, nsteps
            if h < 1e-14 * max(1.0, abs(t)):
                return out, STATUS_STEP_UNDERFLOW, nsteps
            last = h >= target - t
            hh = target - t if last else h
            for s in range(1, 7):
                ys = y.copy()
                for r in range(s):
                    if A[s][r] != 0.0:
                        ys += (hh * A[s][r]) * k[r]
                rhs(conn, curv, jmat, z0, ys, k[s])
            ynew = ys  # stage 7 evaluates at the 5th-order solution
            err = np.zeros(dim)
            for r in range(7):
                if E[r] != 0.0:
                    err += (hh * E[r]) * k[r]
            # one scale for the whole state: entries that stay small while others
            # grow exponentially would otherwise hold the step to rounding noise
            scale = atol + rtol * max(np.abs(y).max(), np.abs(ynew).max())
            enorm = math.sqrt(float(np.mean((err / scale) ** 2)))
            nsteps += 1
            if enorm <= 1.0:
                t = target if last else t + hh
                y = ynew
                k[0] = k[6]
                fac = 5.0 if enorm == 0.0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
                if not last or fac < 1.0:
                    h = hh * fac
            else:
                h = hh * max(0.2, 0.9 * enorm ** -0.2)
        out[idx] = y
    return out, STATUS_OK, nsteps
