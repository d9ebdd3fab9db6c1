"""Left-invariant Levi-Civita geometry in left-trivialized coordinates.

Everything lives in the Lie algebra ``n``: vector fields are identified with
their values at the identity, so the connection and curvature below are the
formulas for left-invariant fields, and a geodesic through the identity is
described by its velocity curve ``t -> z0 + exp(tJ) x0`` with ``J = J_{z0}``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .algebra import (
    AlgebraVector,
    MetricNilpotentAlgebra,
    bracket,
    inner,
    is_pseudo_h_type,
    j_matrix,
    j_operator,
    null_tolerance,
)
from .errors import DependentBasis, DimensionMismatch, NonCentralInput


@dataclass(frozen=True, eq=False)
class GeodesicIC:
    """Initial velocity ``z0 + x0`` of a geodesic through the identity."""

    z0: AlgebraVector
    x0: AlgebraVector
    a: float
    b: float
    g: float

    @property
    def velocity(self) -> AlgebraVector:
        return self.z0 + self.x0


def make_ic(alg: MetricNilpotentAlgebra, z0, x0) -> GeodesicIC:
    """Build a :class:`GeodesicIC` from coordinate arrays or algebra vectors."""
    z0 = z0 if isinstance(z0, AlgebraVector) else alg.vector(z=z0)
    x0 = x0 if isinstance(x0, AlgebraVector) else alg.vector(v=x0)
    alg.conform(z0, x0)
    if np.any(z0.v_part):
        raise NonCentralInput("z0 must be central")
    if np.any(x0.z_part):
        raise DimensionMismatch("x0 must lie in v")
    a = inner(alg, z0, z0)
    b = inner(alg, x0, x0)
    return GeodesicIC(z0, x0, a, b, a + b)


@functools.lru_cache(maxsize=64)
def _pseudo_h(alg: MetricNilpotentAlgebra) -> bool:
    return is_pseudo_h_type(alg)


def _connection_blocks(alg, zx, x, zy, y):
    # nabla_X Y split over (z, v) parts; returns (z block, v block)
    jz = alg.j_basis
    v = -0.5 * (np.tensordot(zx, jz, axes=1) @ y + np.tensordot(zy, jz, axes=1) @ x)
    z = 0.5 * np.einsum("a,b,abk->k", x, y, alg.structure)
    return z, v


def connection(alg: MetricNilpotentAlgebra, X: AlgebraVector, Y: AlgebraVector) -> AlgebraVector:
    """``nabla_X Y`` for the left-invariant fields with values ``X`` and ``Y``."""
    alg.conform(X, Y)
    z, v = _connection_blocks(alg, X.z_part, X.v_part, Y.z_part, Y.v_part)
    return AlgebraVector(z, v)


def _br(alg, x, y):
    return np.einsum("a,b,abk->k", x, y, alg.structure)


def curvature(alg: MetricNilpotentAlgebra, X: AlgebraVector, Y: AlgebraVector, Z: AlgebraVector) -> AlgebraVector:
    """``R(X, Y) Z`` with ``R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``.

    Each argument is split into center and ``v`` parts and the component
    formulas are summed; mixed orders follow from ``R(X,Y) = -R(Y,X)``.
    """
    alg.conform(X, Y, Z)
    J = lambda z: j_matrix(alg, z)
    zx, x = X.z_part, X.v_part
    zy, y = Y.z_part, Y.v_part
    zz, w = Z.z_part, Z.v_part

    out_v = 0.25 * (J(zx) @ J(zy) @ w - J(zy) @ J(zx) @ w)
    out_v += 0.25 * J(zx) @ J(zz) @ y
    out_v -= 0.25 * J(zy) @ J(zz) @ x
    out_v += 0.25 * (J(_br(alg, x, w)) @ y - J(_br(alg, y, w)) @ x) + 0.5 * J(_br(alg, x, y)) @ w

    out_z = 0.25 * _br(alg, y, J(zx) @ w)
    out_z -= 0.25 * _br(alg, x, J(zy) @ w)
    out_z -= 0.25 * (_br(alg, x, J(zz) @ y) + _br(alg, J(zz) @ x, y))
    return AlgebraVector(out_z, out_v)


def exp_tJ(alg: MetricNilpotentAlgebra, ic: GeodesicIC, t: float) -> np.ndarray:
    """``exp(t J_{z0})`` on ``v``.

    Closed forms for pseudo-H algebras (``J^2 = -a I``); a generic Pade
    matrix exponential otherwise.
    """
    J = j_operator(alg, ic.z0)
    eye = np.eye(alg.dim_v)
    if not _pseudo_h(alg):
        return scipy.linalg.expm(t * J)
    a = ic.a
    if abs(a) <= null_tolerance(ic.z0):
        return eye + t * J
    if a > 0:
        alpha = math.sqrt(a)
        return math.cos(alpha * t) * eye + (math.sin(alpha * t) / alpha) * J
    beta = math.sqrt(-a)
    return math.cosh(beta * t) * eye + (math.sinh(beta * t) / beta) * J


def geodesic_velocity(alg: MetricNilpotentAlgebra, ic: GeodesicIC, t: float) -> AlgebraVector:
    return AlgebraVector(ic.z0.z_part, exp_tJ(alg, ic, t) @ ic.x0.v_part)


def jacobi_operator_along(alg: MetricNilpotentAlgebra, ic: GeodesicIC, t: float, Y: AlgebraVector) -> AlgebraVector:
    """``R(Y, gamma'(t)) gamma'(t)`` from the closed form in ``J``, ``J_z`` and
    ``x' = exp(tJ) x0``, without going through :func:`curvature`."""
    alg.conform(Y)
    z, x = Y.z_part, Y.v_part
    J = j_operator(alg, ic.z0)
    Jz = j_matrix(alg, z)
    xp = exp_tJ(alg, ic, t) @ ic.x0.v_part
    br = lambda u, w: _br(alg, u, w)

    out_v = (
        0.75 * j_matrix(alg, br(x, xp)) @ xp
        + 0.5 * Jz @ J @ xp
        - 0.25 * J @ Jz @ xp
        - 0.25 * J @ J @ x
    )
    out_z = -0.5 * br(x, J @ xp) + 0.25 * br(xp, J @ x) + 0.25 * br(xp, Jz @ xp)
    return AlgebraVector(out_z, out_v)


def connection_tensor(alg: MetricNilpotentAlgebra) -> np.ndarray:
    """``C[i, j, k] = (nabla_{e_i} e_j)_k`` in (z, v) coordinate order."""
    n = alg.dim
    basis = [alg.from_array(e) for e in np.eye(n)]
    out = np.empty((n, n, n))
    for i, ei in enumerate(basis):
        for j, ej in enumerate(basis):
            out[i, j] = connection(alg, ei, ej).to_array()
    return out


def curvature_tensor(alg: MetricNilpotentAlgebra) -> np.ndarray:
    """``R[i, j, k, l] = (R(e_i, e_j) e_k)_l`` in (z, v) coordinate order."""
    n = alg.dim
    basis = [alg.from_array(e) for e in np.eye(n)]
    out = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                out[i, j, k] = curvature(alg, basis[i], basis[j], basis[k]).to_array()
                out[j, i, k] = -out[i, j, k]
    return out


def covariant_derivative(tensor: np.ndarray, conn: np.ndarray) -> np.ndarray:
    """``nabla T`` for a left-invariant (1, m) tensor.

    ``tensor`` has ``m`` input axes followed by one output axis; the result
    gains a leading axis for the differentiation direction.
    """
    m = tensor.ndim - 1
    # nabla_W applied to the output: sum_s T[..., s] C[w, s, l]
    out = np.einsum("...s,wsl->w...l", tensor, conn)
    for r in range(m):
        # minus T with nabla_W acting on input slot r
        moved = np.moveaxis(tensor, r, 0)
        term = np.einsum("wis,s...->wi...", conn, moved)
        # term axes: (w, i_r, <other inputs in order>, out) -> put i_r back at slot r
        out -= np.moveaxis(term, 1, r + 1)
    return out


@dataclass(frozen=True)
class TotallyGeodesicCheck:
    """Outcome of :func:`is_totally_geodesic_subalgebra`.

    ``subgroup`` certifies that the connected subgroup with algebra ``h`` is
    totally geodesic (closure under bracket and connection).  ``cartan_order``
    is the highest ``k`` such that ``h`` is invariant under ``R, nabla R, ...,
    nabla^k R`` at the identity (``-1`` if already ``R`` fails); invariance to
    every order characterizes a totally geodesic image ``exp_1(h)`` of the
    geometric exponential map, and the check is truncated at ``max_order``.
    """

    subgroup: bool
    bracket_closed: bool
    cartan_order: int
    max_order: int
    degenerate: bool

    @property
    def curvature_invariant(self) -> bool:
        return self.cartan_order >= self.max_order

    @property
    def totally_geodesic(self) -> bool:
        return self.subgroup or self.curvature_invariant

    @property
    def note(self) -> str:
        if self.degenerate:
            return (
                "induced metric on the span is degenerate: the algebraic certificate uses "
                "the extended definition and may not capture every degenerate case"
            )
        if self.subgroup:
            return "span is a subalgebra closed under the connection"
        if self.curvature_invariant:
            return f"span invariant under curvature and its covariant derivatives up to order {self.max_order}"
        return "span is not totally geodesic"

    def __bool__(self) -> bool:
        return self.totally_geodesic


def is_totally_geodesic_subalgebra(
    alg: MetricNilpotentAlgebra,
    basis: list[AlgebraVector],
    tol: float = 1e-10,
    max_order: int = 2,
) -> TotallyGeodesicCheck:
    alg.conform(*basis)
    if not basis:
        raise DependentBasis("basis must not be empty")
    B = np.array([u.to_array() for u in basis]).T
    if np.linalg.matrix_rank(B, tol=1e-10 * max(1.0, np.abs(B).max())) < B.shape[1]:
        raise DependentBasis("basis vectors must be linearly independent")
    Q, _ = np.linalg.qr(B)
    off = np.eye(alg.dim) - Q @ Q.T

    def outside(vals: np.ndarray) -> bool:
        scale = 1.0 + np.abs(vals).max(initial=0.0)
        return np.abs(vals @ off.T).max(initial=0.0) > tol * scale

    brackets = np.array([bracket(alg, u, w).to_array() for u in basis for w in basis])
    conns = np.array([connection(alg, u, w).to_array() for u in basis for w in basis])
    bracket_closed = not outside(brackets)
    subgroup = bracket_closed and not outside(conns)

    conn = connection_tensor(alg)
    tensor = curvature_tensor(alg)
    order = -1
    for k in range(max_order + 1):
        restricted = tensor
        for _ in range(tensor.ndim - 1):
            # contract the leading input axis with h; it cycles to the back
            restricted = np.moveaxis(np.tensordot(B, restricted, axes=([0], [0])), 0, -2)
        if outside(restricted):
            break
        order = k
        if k < max_order:
            tensor = covariant_derivative(tensor, conn)

    gram = B.T @ alg.metric @ B
    degenerate = abs(np.linalg.det(gram)) < 1e-10 * max(1.0, np.abs(gram).max()) ** B.shape[1]
    return TotallyGeodesicCheck(subgroup, bracket_closed, order, max_order, bool(degenerate))
