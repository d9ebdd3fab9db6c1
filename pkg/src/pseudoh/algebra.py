"""2-step nilpotent metric Lie algebras with a nondegenerate center.

An algebra is stored as ``n = z (+) v`` with an indefinite inner product that
is block diagonal (``z`` orthogonal to ``v``) and a structure tensor ``C`` of
shape ``(q, q, p)`` with ``[e_a, e_b] = sum_k C[a, b, k] z_k``.  Brackets
involving the center vanish, so 2-step nilpotency holds by construction.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import (
    AsymmetricMetric,
    DegenerateMetric,
    DimensionMismatch,
    NonAntisymmetricStructure,
    NonCentralInput,
)

DET_TOL = 1e-10
NULL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AlgebraVector:
    """Element ``z + x`` of ``n = z (+) v`` given by its two coordinate blocks."""

    z_part: np.ndarray
    v_part: np.ndarray

    def __post_init__(self):
        z = np.array(self.z_part, dtype=float).reshape(-1)
        v = np.array(self.v_part, dtype=float).reshape(-1)
        z.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "z_part", z)
        object.__setattr__(self, "v_part", v)

    @classmethod
    def from_array(cls, arr, p: int) -> "AlgebraVector":
        arr = np.asarray(arr, dtype=float)
        return cls(arr[:p], arr[p:])

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.z_part, self.v_part])

    @property
    def center(self) -> "AlgebraVector":
        return AlgebraVector(self.z_part, np.zeros_like(self.v_part))

    @property
    def horizontal(self) -> "AlgebraVector":
        return AlgebraVector(np.zeros_like(self.z_part), self.v_part)

    def is_central(self) -> bool:
        return not np.any(self.v_part)

    def norm(self) -> float:
        """Euclidean coordinate norm (not the indefinite one)."""
        return float(np.linalg.norm(self.to_array()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraVector):
            return NotImplemented
        return np.array_equal(self.z_part, other.z_part) and np.array_equal(self.v_part, other.v_part)

    __hash__ = None

    def __add__(self, other: "AlgebraVector") -> "AlgebraVector":
        return AlgebraVector(self.z_part + other.z_part, self.v_part + other.v_part)

    def __sub__(self, other: "AlgebraVector") -> "AlgebraVector":
        return AlgebraVector(self.z_part - other.z_part, self.v_part - other.v_part)

    def __neg__(self) -> "AlgebraVector":
        return AlgebraVector(-self.z_part, -self.v_part)

    def __mul__(self, s: float) -> "AlgebraVector":
        return AlgebraVector(s * self.z_part, s * self.v_part)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"AlgebraVector(z={self.z_part.tolist()}, v={self.v_part.tolist()})"


class CausalClass(enum.Enum):
    # timelike means POSITIVE square in this convention
    TIMELIKE = "timelike"
    NULL = "null"
    SPACELIKE = "spacelike"


@dataclass(frozen=True, eq=False)
class MetricNilpotentAlgebra:
    dim_center: int
    dim_v: int
    metric_center: np.ndarray
    metric_v: np.ndarray
    structure: np.ndarray
    name: str = "algebra"
    _j_basis: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for attr in ("metric_center", "metric_v", "structure"):
            arr = np.array(getattr(self, attr), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, attr, arr)
        g_v_inv = np.linalg.inv(self.metric_v)
        # B_k[a, b] = sum_l C[a, b, l] G_z[l, k]; then J_{z_k} = -G_v^{-1} B_k
        lowered = np.einsum("abl,lk->kab", self.structure, self.metric_center)
        j_basis = -np.einsum("ac,kcb->kab", g_v_inv, lowered)
        j_basis.flags.writeable = False
        object.__setattr__(self, "_j_basis", j_basis)
        _check_adjoint_identity(self)

    @property
    def dim(self) -> int:
        return self.dim_center + self.dim_v

    @property
    def metric(self) -> np.ndarray:
        """Full block-diagonal Gram matrix in (z, v) coordinate order."""
        p, q = self.dim_center, self.dim_v
        g = np.zeros((p + q, p + q))
        g[:p, :p] = self.metric_center
        g[p:, p:] = self.metric_v
        return g

    @property
    def j_basis(self) -> np.ndarray:
        """Stack of ``J_{z_k}`` for the center basis, shape ``(p, q, q)``."""
        return self._j_basis

    def vector(self, z=None, v=None) -> AlgebraVector:
        z = np.zeros(self.dim_center) if z is None else np.asarray(z, dtype=float)
        v = np.zeros(self.dim_v) if v is None else np.asarray(v, dtype=float)
        if z.shape != (self.dim_center,) or v.shape != (self.dim_v,):
            raise DimensionMismatch(
                f"expected z of length {self.dim_center} and v of length {self.dim_v}, "
                f"got {z.shape} and {v.shape}"
            )
        return AlgebraVector(z, v)

    def z_basis(self, k: int) -> AlgebraVector:
        return self.vector(z=np.eye(self.dim_center)[k])

    def v_basis(self, a: int) -> AlgebraVector:
        return self.vector(v=np.eye(self.dim_v)[a])

    def from_array(self, arr) -> AlgebraVector:
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (self.dim,):
            raise DimensionMismatch(f"expected length {self.dim}, got {arr.shape}")
        return AlgebraVector.from_array(arr, self.dim_center)

    def conform(self, *vectors: AlgebraVector) -> None:
        for u in vectors:
            if u.z_part.shape != (self.dim_center,) or u.v_part.shape != (self.dim_v,):
                raise DimensionMismatch(
                    f"vector with blocks ({u.z_part.size}, {u.v_part.size}) does not "
                    f"belong to an algebra with dims ({self.dim_center}, {self.dim_v})"
                )

    def to_dict(self) -> dict[str, Any]:
        q = self.dim_v
        entries = []
        for a in range(q):
            for b in range(a + 1, q):
                c = self.structure[a, b]
                if np.any(c):
                    entries.append({"a": a, "b": b, "z": c.tolist()})
        return {
            "name": self.name,
            "dim_center": self.dim_center,
            "dim_v": self.dim_v,
            "metric_center": self.metric_center.tolist(),
            "metric_v": self.metric_v.tolist(),
            "structure": entries,
        }


def _check_adjoint_identity(alg: MetricNilpotentAlgebra) -> None:
    # <J_{z_k} x, y>_v == <z_k, [x, y]>_z on basis vectors; catches a transposed assembly
    lhs = np.einsum("kca,cb->kab", alg.j_basis, alg.metric_v)
    rhs = np.einsum("abl,lk->kab", alg.structure, alg.metric_center)
    scale = 1.0 + np.abs(rhs).max(initial=0.0)
    if not np.allclose(lhs, rhs, atol=1e-10 * scale, rtol=0.0):
        raise AssertionError("J operator assembly violates <J_z x, y> = <z, [x, y]>")


def validate_algebra(raw: Mapping[str, Any], name: str = "algebra") -> MetricNilpotentAlgebra:
    """Build a validated algebra from a JSON-style description.

    ``structure`` may be the file format's list of ``{"a", "b", "z"}`` entries
    (pairs ``a < b`` only, mirrored antisymmetrically) or a dense ``(q, q, p)``
    nested list, in which case antisymmetry is checked rather than imposed.
    An optional ``"pseudo_h": true`` asserts pseudo-H type, which requires an
    even ``dim_v``.
    """
    try:
        p = int(raw["dim_center"])
        q = int(raw["dim_v"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DimensionMismatch(f"missing or invalid dimensions: {exc}") from None
    if p < 1 or q < 1:
        raise DimensionMismatch("dim_center and dim_v must be positive")

    g_z = np.asarray(raw.get("metric_center"), dtype=float)
    g_v = np.asarray(raw.get("metric_v"), dtype=float)
    if g_z.shape != (p, p):
        raise DimensionMismatch(f"metric_center has shape {g_z.shape}, expected {(p, p)}")
    if g_v.shape != (q, q):
        raise DimensionMismatch(f"metric_v has shape {g_v.shape}, expected {(q, q)}")
    for label, g in (("metric_center", g_z), ("metric_v", g_v)):
        if not np.allclose(g, g.T, atol=1e-14, rtol=0.0):
            raise AsymmetricMetric(f"{label} is not symmetric")
        if abs(np.linalg.det(g)) < DET_TOL:
            raise DegenerateMetric(f"{label} is degenerate (|det| < {DET_TOL:g})")

    structure = raw.get("structure", [])
    if isinstance(structure, np.ndarray) or (
        isinstance(structure, list) and structure and not isinstance(structure[0], Mapping)
    ):
        c = np.asarray(structure, dtype=float)
        if c.shape != (q, q, p):
            raise DimensionMismatch(f"structure has shape {c.shape}, expected {(q, q, p)}")
        if not np.allclose(c, -c.transpose(1, 0, 2), atol=1e-14, rtol=0.0):
            raise NonAntisymmetricStructure("C[a][b] != -C[b][a]")
    else:
        c = np.zeros((q, q, p))
        seen: set[tuple[int, int]] = set()
        for entry in structure:
            a, b = int(entry["a"]), int(entry["b"])
            coeffs = np.asarray(entry["z"], dtype=float)
            if not (0 <= a < q and 0 <= b < q):
                raise DimensionMismatch(f"bracket index ({a}, {b}) out of range")
            if coeffs.shape != (p,):
                raise DimensionMismatch(f"bracket [{a},{b}] has {coeffs.size} coefficients, expected {p}")
            if a == b:
                if np.any(coeffs):
                    raise NonAntisymmetricStructure(f"[e_{a}, e_{a}] must vanish")
                continue
            if a > b:
                a, b, coeffs = b, a, -coeffs
            if (a, b) in seen:
                if not np.allclose(c[a, b], coeffs, atol=1e-14, rtol=0.0):
                    raise NonAntisymmetricStructure(f"conflicting entries for [e_{a}, e_{b}]")
                continue
            seen.add((a, b))
            c[a, b] = coeffs
            c[b, a] = -coeffs

    if raw.get("pseudo_h") and q % 2:
        raise DimensionMismatch("a pseudo-H-type algebra needs even dim_v")
    return MetricNilpotentAlgebra(p, q, g_z, g_v, c, name=raw.get("name", name))


def bracket(alg: MetricNilpotentAlgebra, u: AlgebraVector, w: AlgebraVector) -> AlgebraVector:
    alg.conform(u, w)
    z = np.einsum("a,b,abk->k", u.v_part, w.v_part, alg.structure)
    return AlgebraVector(z, np.zeros(alg.dim_v))


def inner(alg: MetricNilpotentAlgebra, u: AlgebraVector, w: AlgebraVector) -> float:
    alg.conform(u, w)
    return float(u.z_part @ alg.metric_center @ w.z_part + u.v_part @ alg.metric_v @ w.v_part)


def j_matrix(alg: MetricNilpotentAlgebra, z) -> np.ndarray:
    """``J_z`` for a raw center coordinate array (no checks)."""
    return np.tensordot(np.asarray(z, dtype=float), alg.j_basis, axes=1)


def j_operator(alg: MetricNilpotentAlgebra, z: AlgebraVector) -> np.ndarray:
    """Matrix of ``J_z`` on ``v``, defined by ``<J_z x, y> = <z, [x, y]>``."""
    alg.conform(z)
    if not z.is_central():
        raise NonCentralInput("J_z is only defined for central z")
    return j_matrix(alg, z.z_part)


def is_pseudo_h_type(alg: MetricNilpotentAlgebra, tol: float = 1e-10) -> bool:
    # polarized form: J_a J_b + J_b J_a = -2 <z_a, z_b> I on basis pairs
    js = alg.j_basis
    eye = np.eye(alg.dim_v)
    for i in range(alg.dim_center):
        for k in range(i, alg.dim_center):
            anti = js[i] @ js[k] + js[k] @ js[i]
            if np.abs(anti + 2.0 * alg.metric_center[i, k] * eye).max() > tol:
                return False
    return True


def null_tolerance(u: AlgebraVector) -> float:
    return NULL_TOL * (1.0 + u.norm() ** 2)


def causal_class(alg: MetricNilpotentAlgebra, u: AlgebraVector, tol: float | None = None) -> CausalClass:
    """Timelike for positive square, spacelike for negative, null within ``tol``.

    The default tolerance scales with the coordinate norm, ``1e-9 (1 + |u|^2)``.
    """
    s = inner(alg, u, u)
    tol = null_tolerance(u) if tol is None else tol
    if s > tol:
        return CausalClass.TIMELIKE
    if s < -tol:
        return CausalClass.SPACELIKE
    return CausalClass.NULL


def numerical_rank(m: np.ndarray, tol: float) -> int:
    s = np.linalg.svd(np.atleast_2d(m), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def jz_rank(alg: MetricNilpotentAlgebra, z: AlgebraVector, tol: float = 1e-8) -> int:
    return numerical_rank(j_operator(alg, z), tol)


def ad_matrix(alg: MetricNilpotentAlgebra, x: AlgebraVector) -> np.ndarray:
    """Matrix of ``ad_x`` restricted to ``v -> z`` (shape ``(p, q)``)."""
    alg.conform(x)
    return np.einsum("a,abk->kb", x.v_part, alg.structure)


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    LIKELY_TRUE = "likely-true"


@dataclass(frozen=True)
class PseudoregularVerdict:
    verdict: Verdict
    witness: AlgebraVector | None = None
    failed_condition: str | None = None
    samples: int = 0

    def __bool__(self) -> bool:
        return self.verdict is not Verdict.FALSE


def _candidate_directions(dim: int):
    eye = np.eye(dim)
    for i in range(dim):
        yield eye[i]
    for i in range(dim):
        for k in range(i + 1, dim):
            yield eye[i] + eye[k]
            yield eye[i] - eye[k]


def is_pseudoregular(
    alg: MetricNilpotentAlgebra,
    sample_count: int = 200,
    rng_seed: int = 0,
    tol: float = 1e-8,
) -> PseudoregularVerdict:
    """Sampling test for pseudoregularity.

    ``ad_x`` must be onto ``z`` for nonnull ``x`` in ``v`` and ``J_z`` must be
    invertible for nonnull central ``z``.  Basis-aligned vectors and sums or
    differences of basis pairs are tried first, then ``sample_count`` Gaussian
    samples of each kind.  The condition ranges over infinitely many vectors,
    so a pass is only ``LIKELY_TRUE``; a failure carries its witness.
    """
    p, q = alg.dim_center, alg.dim_v

    def x_fails(x: AlgebraVector) -> bool:
        return numerical_rank(ad_matrix(alg, x), tol) < p

    def z_fails(z: AlgebraVector) -> bool:
        return numerical_rank(j_operator(alg, z), tol) < q

    for coords in _candidate_directions(q):
        x = alg.vector(v=coords)
        if causal_class(alg, x) is not CausalClass.NULL and x_fails(x):
            return PseudoregularVerdict(Verdict.FALSE, x, "ad_x not surjective")
    for coords in _candidate_directions(p):
        z = alg.vector(z=coords)
        if causal_class(alg, z) is not CausalClass.NULL and z_fails(z):
            return PseudoregularVerdict(Verdict.FALSE, z, "J_z singular")

    rng = np.random.default_rng(rng_seed)
    taken = 0
    for _ in range(100 * sample_count):
        if taken >= sample_count:
            break
        x = alg.vector(v=rng.standard_normal(q))
        z = alg.vector(z=rng.standard_normal(p))
        # stay well away from the null cone so rank tests are well conditioned
        if abs(inner(alg, x, x)) < 0.05 * x.norm() ** 2 or abs(inner(alg, z, z)) < 0.05 * z.norm() ** 2:
            continue
        taken += 1
        if x_fails(x):
            return PseudoregularVerdict(Verdict.FALSE, x, "ad_x not surjective", taken)
        if z_fails(z):
            return PseudoregularVerdict(Verdict.FALSE, z, "J_z singular", taken)
    return PseudoregularVerdict(Verdict.LIKELY_TRUE, samples=taken)
