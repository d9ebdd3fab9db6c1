"""Brute-force conjugate-point oracle.

Jacobi fields are integrated as a linear ODE in the left-invariant frame.
With ``P = nabla_{gamma'} Y`` the Jacobi equation reads

    Y' = P - nabla_{gamma'} Y
    P' = -R(Y, gamma') gamma' - nabla_{gamma'} P

where ``nabla`` is the left-invariant connection applied to frame
components.  The ``v`` part of the velocity is integrated alongside
(``w' = J w``) so the oracle never uses the closed-form ``exp(tJ)``.
Columns start from ``Y(0) = 0``, ``P(0) = e_i``; a conjugate point is a time
where the endpoint matrix ``M(t) = [Y_1(t) ... Y_n(t)]`` loses rank.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import kernels
from .algebra import AlgebraVector, MetricNilpotentAlgebra, j_operator
from .analytic import Branch, ConjugatePoint, GeodesicInvariants, default_window, geodesic_invariants
from .errors import IntegratorFailure
from .geometry import (
    GeodesicIC,
    connection,
    connection_tensor,
    curvature_tensor,
    geodesic_velocity,
    jacobi_operator_along,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45"
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    step: float | None = None
    scan_points_per_period: int = 64
    rank_tol: float = 1e-7
    bisect_tol: float = 1e-9
    dead_zone: float = 1e-3
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.scan_points_per_period < 32:
            raise ValueError("scan_points_per_period must be at least 32")
        for name in ("rel_tol", "abs_tol", "rank_tol", "bisect_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")


@dataclass(frozen=True, eq=False)
class JacobiEndpointMatrix:
    t: float
    M: np.ndarray
    smin: float
    smax: float
    logdet: float
    det_sign: float

    @property
    def smin_rel(self) -> float:
        return self.smin / self.smax if self.smax > 0 else 0.0


def endpoint_matrix(t: float, M: np.ndarray) -> JacobiEndpointMatrix:
    s = np.linalg.svd(M, compute_uv=False)
    # log|det| as a sum of logs of the pivoted-QR diagonal, so it never overflows
    Q, R, piv = scipy.linalg.qr(M, pivoting=True)
    diag = np.diag(R)
    if not np.all(diag):
        return JacobiEndpointMatrix(float(t), M, float(s[-1]), float(s[0]), -math.inf, 0.0)
    logdet = float(np.sum(np.log(np.abs(diag))))
    parity = np.linalg.det(np.eye(len(piv))[:, piv])
    sign = float(np.sign(np.linalg.det(Q)) * np.prod(np.sign(diag)) * np.sign(parity))
    return JacobiEndpointMatrix(float(t), M, float(s[-1]), float(s[0]), logdet, sign)


class JacobiFlow:
    """Propagator for the ``n`` Jacobi columns plus the geodesic velocity."""

    def __init__(self, alg: MetricNilpotentAlgebra, ic: GeodesicIC, cfg: IntegratorConfig = IntegratorConfig()):
        self.alg = alg
        self.ic = ic
        self.cfg = cfg
        self.conn = connection_tensor(alg)
        self.curv = curvature_tensor(alg)
        self.jmat = j_operator(alg, ic.z0)
        self.z0 = np.array(ic.z0.z_part)
        n, q = alg.dim, alg.dim_v
        self.n, self.q = n, q
        inv = _invariants_or_none(alg, ic)
        self.period = inv.period if inv is not None else 1.0
        self.method = 1 if cfg.method == "rk4" else 0
        if self.method == 1:
            self.h = cfg.step if cfg.step is not None else self.period / 512.0
        else:
            self.h = self.period / (4.0 * cfg.scan_points_per_period)

    def initial_state(self, columns: np.ndarray | None = None) -> np.ndarray:
        """``Y(0) = 0`` and ``P(0) = columns`` (identity by default)."""
        n = self.n
        P0 = np.eye(n) if columns is None else np.asarray(columns, dtype=float).reshape(n, -1)
        m = P0.shape[1]
        return np.concatenate([self.ic.x0.v_part, np.zeros(n * m), P0.reshape(-1)])

    def propagate(self, t_start: float, state: np.ndarray, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        out, status, nsteps = kernels.propagate(
            self.conn, self.curv, self.jmat, self.z0, float(t_start), state, times,
            self.method, self.cfg.rel_tol, self.cfg.abs_tol, self.h, self.cfg.max_steps,
        )
        if status == kernels.STATUS_STEP_UNDERFLOW:
            raise IntegratorFailure(f"step size underflow before t={times[-1]:g}")
        if status == kernels.STATUS_MAX_STEPS:
            raise IntegratorFailure(f"step budget of {self.cfg.max_steps} exhausted")
        return out

    def split(self, state: np.ndarray):
        """``(w, Y, P)`` views of a flat state; ``Y`` and ``P`` are ``n x m``."""
        n, q = self.n, self.q
        m = (state.shape[-1] - q) // (2 * n)
        w = state[..., :q]
        Y = state[..., q : q + n * m].reshape(state.shape[:-1] + (n, m))
        P = state[..., q + n * m :].reshape(state.shape[:-1] + (n, m))
        return w, Y, P

    def matrix_at(self, t_start: float, state: np.ndarray, t: float) -> np.ndarray:
        return self.split(self.propagate(t_start, state, [t])[0])[1]


def _invariants_or_none(alg, ic) -> GeodesicInvariants | None:
    try:
        return geodesic_invariants(alg, ic)
    except ValueError:
        return None


def numeric_default_window(inv: GeodesicInvariants) -> tuple[float, float]:
    """Scan window used when none is given.

    Same as the analytic default except for a spacelike center: there the
    velocity grows like ``exp(beta t)`` and the adaptive step count with it,
    so the window stops at ``8 / beta``.
    """
    if inv.center_sign < 0 and not inv.z0_zero:
        return (0.0, 8.0 / inv.beta)
    return default_window(inv)


def jacobi_system_rhs(alg: MetricNilpotentAlgebra, ic: GeodesicIC, t: float, Y: AlgebraVector, P: AlgebraVector):
    """Right-hand side ``(Y', P')`` of the first-order Jacobi system at time ``t``."""
    gd = geodesic_velocity(alg, ic, t)
    dY = P - connection(alg, gd, Y)
    dP = -jacobi_operator_along(alg, ic, t, Y) - connection(alg, gd, P)
    return dY, dP


@dataclass(frozen=True, eq=False)
class Scan:
    flow: JacobiFlow
    times: np.ndarray
    states: np.ndarray
    matrices: list[JacobiEndpointMatrix] = field(default_factory=list)


def _scan(alg, ic, window, cfg, pad=False) -> Scan:
    lo, hi = window
    if not (0.0 <= lo < hi):
        raise ValueError("numeric windows must satisfy 0 <= lo < hi")
    flow = JacobiFlow(alg, ic, cfg)
    spacing = flow.period / cfg.scan_points_per_period
    count = max(8, int(math.ceil((hi - lo) / spacing)))
    times = np.linspace(lo, hi, count + 1)
    if pad:
        # extra grid points past each end so minima on the window boundary are interior
        step = times[1] - times[0]
        before = [t for t in (lo - 2 * step, lo - step) if t > 0.0]
        times = np.concatenate([before, times, [hi + step, hi + 2 * step]])
    states = flow.propagate(0.0, flow.initial_state(), times)
    _, Ys, _ = flow.split(states)
    matrices = [endpoint_matrix(t, M) for t, M in zip(times, Ys)]
    return Scan(flow, times, states, matrices)


def integrate_jacobi_basis(
    alg: MetricNilpotentAlgebra,
    ic: GeodesicIC,
    window: tuple[float, float],
    cfg: IntegratorConfig = IntegratorConfig(),
) -> list[JacobiEndpointMatrix]:
    """Endpoint matrices on a uniform grid over ``window`` (integration starts at 0)."""
    return _scan(alg, ic, window, cfg).matrices


def _golden_min(f, a, b, tol):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def detect_conjugate_points(
    alg: MetricNilpotentAlgebra,
    ic: GeodesicIC,
    window: tuple[float, float],
    cfg: IntegratorConfig = IntegratorConfig(),
) -> list[ConjugatePoint]:
    """Locate rank drops of the Jacobi endpoint matrix inside ``window``.

    Interior local minima of ``smin / smax`` on the scan grid are refined by
    golden-section search; a minimum counts when the refined ratio is below
    ``rank_tol``, and its multiplicity is the number of singular values under
    ``rank_tol * smax`` there.
    """
    scan = _scan(alg, ic, window, cfg, pad=True)
    flow = scan.flow
    ratios = np.array([m.smin_rel for m in scan.matrices])
    lo, hi = window
    dead = cfg.dead_zone * (hi - lo)
    slack = 100 * cfg.bisect_tol

    found: list[ConjugatePoint] = []
    for k in range(1, len(scan.times) - 1):
        if scan.times[k - 1] <= dead:
            continue
        if not (ratios[k] < ratios[k - 1] and ratios[k] <= ratios[k + 1]):
            continue
        t_a, t_b = scan.times[k - 1], scan.times[k + 1]
        base = scan.states[k - 1]

        def rel_smin(t):
            s = np.linalg.svd(flow.matrix_at(t_a, base, t), compute_uv=False)
            return s[-1] / s[0]

        t_star, r_star = _golden_min(rel_smin, t_a, t_b, cfg.bisect_tol)
        edge = min(t_star - t_a, t_b - t_star) <= 2 * cfg.bisect_tol
        if r_star >= cfg.rank_tol or edge or not (lo - slack <= t_star <= hi + slack) or t_star <= dead:
            continue
        s = np.linalg.svd(flow.matrix_at(t_a, base, t_star), compute_uv=False)
        mult = int(np.count_nonzero(s < cfg.rank_tol * s[0]))
        flags = ()
        if scan.matrices[k - 1].det_sign * scan.matrices[k + 1].det_sign < 0:
            flags = ("det-sign-change",)
        found.append(ConjugatePoint(float(t_star), mult, Branch.NUMERIC, float(r_star), flags))

    found.sort(key=lambda c: c.t0)
    out = []
    for cp in found:
        near = [o for o in found if o is not cp and abs(o.t0 - cp.t0) < 10 * cfg.bisect_tol]
        if near:
            cp = ConjugatePoint(cp.t0, cp.multiplicity, cp.branch, cp.residual, cp.flags + ("cluster",))
        out.append(cp)
    return out


@dataclass
class CrossValidationReport:
    matched: list[tuple[ConjugatePoint, ConjugatePoint]]
    analytic_only: list[ConjugatePoint]
    numeric_only: list[ConjugatePoint]
    mult_strict: bool = True

    @property
    def multiplicity_mismatches(self) -> list[tuple[ConjugatePoint, ConjugatePoint]]:
        return [(a, n) for a, n in self.matched if a.multiplicity != n.multiplicity]

    @property
    def mismatches(self) -> int:
        count = len(self.analytic_only) + len(self.numeric_only)
        if self.mult_strict:
            count += len(self.multiplicity_mismatches)
        return count

    @property
    def ok(self) -> bool:
        return self.mismatches == 0

    @property
    def exit_status(self) -> int:
        return 0 if self.ok else 1

    def rows(self) -> list[dict]:
        rows = [
            {
                "status": "matched",
                "t_analytic": a.t0,
                "t_numeric": n.t0,
                "dt": n.t0 - a.t0,
                "mult_analytic": a.multiplicity,
                "mult_numeric": n.multiplicity,
                "mult_agree": a.multiplicity == n.multiplicity,
                "branch": a.branch.value,
            }
            for a, n in self.matched
        ]
        rows += [
            {"status": "analytic-only", "t_analytic": a.t0, "mult_analytic": a.multiplicity, "branch": a.branch.value}
            for a in self.analytic_only
        ]
        rows += [{"status": "numeric-only", "t_numeric": n.t0, "mult_numeric": n.multiplicity} for n in self.numeric_only]
        return rows


def cross_validate(
    analytic: list[ConjugatePoint],
    numeric: list[ConjugatePoint],
    t_tol: float = 1e-6,
    mult_strict: bool = True,
) -> CrossValidationReport:
    remaining = list(numeric)
    matched, analytic_only = [], []
    for a in sorted(analytic, key=lambda c: c.t0):
        best = min(remaining, key=lambda n: abs(n.t0 - a.t0), default=None)
        if best is not None and abs(best.t0 - a.t0) < t_tol:
            matched.append((a, best))
            remaining.remove(best)
        else:
            analytic_only.append(a)
    return CrossValidationReport(matched, analytic_only, sorted(remaining, key=lambda c: c.t0), mult_strict)
