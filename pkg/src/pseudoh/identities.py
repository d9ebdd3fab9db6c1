"""Randomized identity suites for an algebra's structure and geometry.

Each suite draws seeded random inputs and returns the worst relative error
``|lhs - rhs| / (1 + max|term|)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import MetricNilpotentAlgebra, bracket, inner, is_pseudo_h_type, j_matrix
from .geometry import (
    connection,
    curvature,
    exp_tJ,
    geodesic_velocity,
    jacobi_operator_along,
    make_ic,
)


@dataclass(frozen=True)
class IdentityResult:
    name: str
    max_error: float
    tol: float
    samples: int
    skipped: str | None = None

    @property
    def passed(self) -> bool:
        return self.skipped is not None or self.max_error < self.tol


def _rel(diff, *terms) -> float:
    diff = np.atleast_1d(np.asarray(diff, dtype=float))
    scale = max((np.abs(np.atleast_1d(np.asarray(t, dtype=float))).max(initial=0.0) for t in terms), default=0.0)
    return float(np.abs(diff).max(initial=0.0) / (1.0 + scale))


def _vec(alg, rng):
    return alg.from_array(rng.standard_normal(alg.dim))


def pseudo_h_identities(alg, rng, samples):
    """The four pseudo-H identities for inner products and brackets of ``J``."""
    worst = 0.0
    p, q = alg.dim_center, alg.dim_v
    eye = np.eye(q)
    gz, gv = alg.metric_center, alg.metric_v
    for _ in range(samples):
        z, z2 = rng.standard_normal(p), rng.standard_normal(p)
        x, y = rng.standard_normal(q), rng.standard_normal(q)
        Jz, Jz2 = j_matrix(alg, z), j_matrix(alg, z2)
        zz2, zz, xx, xy = z @ gz @ z2, z @ gz @ z, x @ gv @ x, x @ gv @ y
        a = (Jz @ x) @ gv @ (Jz2 @ x)
        worst = max(worst, _rel(a - zz2 * xx, a, zz2 * xx))
        b = (Jz @ x) @ gv @ (Jz @ y)
        worst = max(worst, _rel(b - zz * xy, b, zz * xy))
        c = Jz @ Jz2 + Jz2 @ Jz
        worst = max(worst, _rel(c + 2 * zz2 * eye, c))
        d = np.einsum("a,b,abk->k", x, Jz @ x, alg.structure)
        worst = max(worst, _rel(d - xx * z, d, xx * z))
    return worst


def skew_adjoint(alg, rng, samples):
    worst = 0.0
    gv = alg.metric_v
    for _ in range(samples):
        Jz = j_matrix(alg, rng.standard_normal(alg.dim_center))
        x, y = rng.standard_normal(alg.dim_v), rng.standard_normal(alg.dim_v)
        lhs, rhs = (Jz @ x) @ gv @ y, x @ gv @ (Jz @ y)
        worst = max(worst, _rel(lhs + rhs, lhs, rhs))
    return worst


def bracket_antisymmetry(alg, rng, samples):
    worst = 0.0
    for _ in range(samples):
        u, w, r = _vec(alg, rng), _vec(alg, rng), _vec(alg, rng)
        s = rng.standard_normal()
        uw, wu = bracket(alg, u, w).to_array(), bracket(alg, w, u).to_array()
        worst = max(worst, _rel(uw + wu, uw))
        lin = bracket(alg, u + s * r, w).to_array()
        ref = uw + s * bracket(alg, r, w).to_array()
        worst = max(worst, _rel(lin - ref, ref))
    return worst


def torsion_free(alg, rng, samples):
    worst = 0.0
    for _ in range(samples):
        X, Y = _vec(alg, rng), _vec(alg, rng)
        lhs = (connection(alg, X, Y) - connection(alg, Y, X)).to_array()
        rhs = bracket(alg, X, Y).to_array()
        worst = max(worst, _rel(lhs - rhs, lhs, rhs))
    return worst


def metric_compatibility(alg, rng, samples):
    worst = 0.0
    for _ in range(samples):
        X, Y, Z = _vec(alg, rng), _vec(alg, rng), _vec(alg, rng)
        a = inner(alg, connection(alg, X, Y), Z)
        b = inner(alg, Y, connection(alg, X, Z))
        worst = max(worst, _rel(a + b, a, b))
    return worst


def curvature_symmetries(alg, rng, samples):
    """Antisymmetry in each pair and pair symmetry of ``<R(X,Y)Z, W>``."""
    worst = 0.0
    for _ in range(samples):
        X, Y, Z, W = (_vec(alg, rng) for _ in range(4))
        r = lambda a, b, c, d: inner(alg, curvature(alg, a, b, c), d)
        base = r(X, Y, Z, W)
        for other in (-r(Y, X, Z, W), -r(X, Y, W, Z), r(Z, W, X, Y)):
            worst = max(worst, _rel(base - other, base, other))
    return worst


def first_bianchi(alg, rng, samples):
    worst = 0.0
    for _ in range(samples):
        X, Y, Z = _vec(alg, rng), _vec(alg, rng), _vec(alg, rng)
        terms = [curvature(alg, X, Y, Z), curvature(alg, Y, Z, X), curvature(alg, Z, X, Y)]
        arrs = [t.to_array() for t in terms]
        worst = max(worst, _rel(sum(arrs), *arrs))
    return worst


def jacobi_operator_consistency(alg, rng, samples):
    """Closed-form Jacobi operator against ``R(Y, gamma') gamma'``."""
    worst = 0.0
    for _ in range(samples):
        ic = make_ic(alg, rng.standard_normal(alg.dim_center), rng.standard_normal(alg.dim_v))
        t = rng.uniform(-2.0, 2.0)
        Y = _vec(alg, rng)
        gd = geodesic_velocity(alg, ic, t)
        lhs = jacobi_operator_along(alg, ic, t, Y).to_array()
        rhs = curvature(alg, Y, gd, gd).to_array()
        worst = max(worst, _rel(lhs - rhs, lhs, rhs))
    return worst


def exp_one_parameter_group(alg, rng, samples):
    worst = 0.0
    for _ in range(samples):
        ic = make_ic(alg, rng.standard_normal(alg.dim_center), rng.standard_normal(alg.dim_v))
        s, t = rng.uniform(-2.0, 2.0, size=2)
        lhs = exp_tJ(alg, ic, s + t)
        rhs = exp_tJ(alg, ic, s) @ exp_tJ(alg, ic, t)
        worst = max(worst, _rel(lhs - rhs, lhs, rhs))
    return worst


SUITES: list[tuple[str, Callable, bool]] = [
    # (name, suite, needs pseudo-H)
    ("pseudo-H inner product and bracket identities", pseudo_h_identities, True),
    ("J_z skew-adjoint", skew_adjoint, False),
    ("bracket bilinear and antisymmetric", bracket_antisymmetry, False),
    ("torsion-free", torsion_free, False),
    ("metric compatibility", metric_compatibility, False),
    ("curvature symmetries", curvature_symmetries, False),
    ("first Bianchi", first_bianchi, False),
    ("Jacobi operator closed form = R(., g')g'", jacobi_operator_consistency, False),
    ("exp(tJ) one-parameter group", exp_one_parameter_group, False),
]


def run_suites(alg: MetricNilpotentAlgebra, samples: int = 100, seed: int = 0, tol: float = 1e-9) -> list[IdentityResult]:
    pseudo_h = is_pseudo_h_type(alg)
    results = []
    for i, (name, suite, needs_h) in enumerate(SUITES):
        if needs_h and not pseudo_h:
            results.append(IdentityResult(name, float("nan"), tol, 0, skipped="not pseudo-H type"))
            continue
        rng = np.random.default_rng([seed, i])
        results.append(IdentityResult(name, suite(alg, rng, samples), tol, samples))
    return results
