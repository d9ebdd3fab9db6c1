"""Closed-form conjugate loci of geodesics in pseudo-H-type groups.

For a geodesic with initial velocity ``z0 + x0`` everything depends only on
``a = <z0,z0>``, ``b = <x0,x0>``, ``g = a + b`` and the dimensions
``p = dim z``, ``q = dim v``:

* ``a > 0`` (``alpha = sqrt(a)``): the lattice ``(2 pi / alpha) Z*`` plus the
  roots of

  - A1: ``b (alpha t / 2) cot(alpha t / 2) = g``
  - A2: ``alpha t = b / (g + a) sin(alpha t)`` (only when ``p >= 2``)

* ``a < 0`` (``beta = sqrt(-a)``): roots of the hyperbolic analogues B1
  (``coth``) and B2 (``sinh``).
* ``a = 0``, ``z0 != 0``: ``t^2 = -12 / b`` with multiplicity ``p - 1``.
* ``z0 = 0``: ``t^2 = -12 / b`` with multiplicity ``p``.
* ``x0 = 0``: the lattice, multiplicity ``q``.

A1/B1 are solved in the pole-free form ``b u cos u - g sin u = 0`` (and the
hyperbolic analogue) with ``u = alpha t / 2``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .algebra import MetricNilpotentAlgebra, null_tolerance
from .errors import (
    CenterTooSmall,
    DegenerateDenominator,
    InconsistentMembership,
    WrongCausalClass,
    ZeroVelocity,
)
from .geometry import GeodesicIC


class Branch(str, enum.Enum):
    LATTICE = "lattice"
    A1 = "A1"
    A2 = "A2"
    A1_A2 = "A1&A2"
    B1 = "B1"
    B2 = "B2"
    B1_B2 = "B1&B2"
    NULL_CENTER = "null-center"
    PURE_CENTER = "pure-center"
    PURE_V = "pure-v"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class ConjugatePoint:
    t0: float
    multiplicity: int
    branch: Branch
    residual: float = 0.0
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class GeodesicInvariants:
    a: float
    b: float
    g: float
    p: int
    q: int
    z0_zero: bool = False
    x0_zero: bool = False
    null_tol: float = 1e-12

    def __post_init__(self):
        if self.z0_zero and self.x0_zero:
            raise ZeroVelocity("z0 and x0 are both zero")

    @classmethod
    def from_scalars(cls, a: float, b: float, p: int, q: int, **kw) -> "GeodesicInvariants":
        return cls(a, b, a + b, p, q, **kw)

    @property
    def center_sign(self) -> int:
        if self.z0_zero or abs(self.a) <= self.null_tol:
            return 0
        return 1 if self.a > 0 else -1

    @property
    def alpha(self) -> float:
        return math.sqrt(self.a)

    @property
    def beta(self) -> float:
        return math.sqrt(-self.a)

    @property
    def period(self) -> float:
        """Characteristic time scale used for default windows and grids."""
        if self.center_sign > 0:
            return 2 * math.pi / self.alpha
        if self.center_sign < 0:
            return 2 * math.pi / self.beta
        return 2 * math.pi / math.sqrt(abs(self.b)) if self.b else 1.0

    def scaled(self, s: float) -> "GeodesicInvariants":
        """Invariants of the initial velocity multiplied by ``s``."""
        s2 = s * s
        return GeodesicInvariants(
            self.a * s2, self.b * s2, self.g * s2, self.p, self.q,
            self.z0_zero, self.x0_zero, self.null_tol * s2,
        )


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-12
    grid_per_period: int = 64
    merge_tol_rel: float = 1e-9
    max_bisections: int = 200


def geodesic_invariants(alg: MetricNilpotentAlgebra, ic: GeodesicIC) -> GeodesicInvariants:
    z0_zero = not np.any(ic.z0.z_part)
    x0_zero = not np.any(ic.x0.v_part)
    if z0_zero and x0_zero:
        raise ZeroVelocity("initial velocity is zero")
    return GeodesicInvariants(
        ic.a, ic.b, ic.g, alg.dim_center, alg.dim_v, z0_zero, x0_zero, null_tolerance(ic.z0)
    )


def default_window(inv: GeodesicInvariants) -> tuple[float, float]:
    if inv.center_sign < 0 and not inv.z0_zero:
        return (0.0, 20.0 / inv.beta)
    return (0.0, 6.0 * inv.period)


# --- defining equations -------------------------------------------------------
# each returns (value, magnitude scale) so residuals can be reported relative


def _a1(inv, t):
    u = 0.5 * inv.alpha * t
    lhs = inv.b * u * math.cos(u)
    rhs = inv.g * math.sin(u)
    return lhs - rhs, abs(lhs) + abs(rhs)


def _b1(inv, t):
    # b u cosh u - g sinh u, divided through by e^u / 2 to stay finite
    u = 0.5 * inv.beta * t
    em = math.exp(-2.0 * abs(u))
    lhs = inv.b * u * (1.0 + em)
    rhs = inv.g * math.copysign(1.0 - em, u)
    return lhs - rhs, abs(lhs) + abs(rhs)


def _denominator_vanishes(inv) -> bool:
    return abs(inv.g + inv.a) <= inv.null_tol


def _ratio(inv):
    denom = inv.g + inv.a
    if _denominator_vanishes(inv):
        raise DegenerateDenominator("g + a = 0: the A2/B2 sets are undefined")
    return inv.b / denom


def _a2(inv, t):
    u = inv.alpha * t
    rhs = _ratio(inv) * math.sin(u)
    return u - rhs, abs(u) + abs(rhs)


def _b2(inv, t):
    u = inv.beta * t
    c = _ratio(inv)
    # u - c sinh u, scaled by e^{-|u|} for large arguments
    if abs(u) > 20.0:
        sc = math.exp(-abs(u))
        lhs = u * sc
        rhs = c * 0.5 * math.copysign(1.0 - math.exp(-2.0 * abs(u)), u)
    else:
        lhs, rhs = u, c * math.sinh(u)
    return lhs - rhs, abs(lhs) + abs(rhs)


_EQUATIONS = {Branch.A1: _a1, Branch.A2: _a2, Branch.B1: _b1, Branch.B2: _b2}


def branch_residual(branch: Branch, inv: GeodesicInvariants, t: float) -> float:
    """Relative residual of the defining equation of ``branch`` at ``t``."""
    if branch in (Branch.LATTICE, Branch.PURE_CENTER):
        return abs(math.sin(0.5 * inv.alpha * t))
    if branch in (Branch.NULL_CENTER, Branch.PURE_V):
        return abs(inv.b * t * t + 12.0) / 12.0
    if branch is Branch.A1_A2:
        return max(branch_residual(Branch.A1, inv, t), branch_residual(Branch.A2, inv, t))
    if branch is Branch.B1_B2:
        return max(branch_residual(Branch.B1, inv, t), branch_residual(Branch.B2, inv, t))
    value, scale = _EQUATIONS[branch](inv, t)
    return float(abs(value) / scale if scale else abs(value))


def _bisect(f, lo, flo, hi, max_iter):
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _positive_roots(f, t_max, step, max_iter):
    """Sign changes of ``f`` on a uniform grid over ``(0, t_max]``, bisected."""
    if t_max <= 0:
        return []
    count = max(2, int(math.ceil(t_max / step)))
    grid = np.linspace(0.0, t_max, count + 1).tolist()
    grid[0] = min(1e-9 * step, 0.5 * grid[1])
    vals = [f(t) for t in grid]
    roots = []
    for i in range(count):
        f0, f1 = vals[i], vals[i + 1]
        if f0 == 0.0 and i > 0:
            roots.append(grid[i])
        elif f0 * f1 < 0:
            roots.append(_bisect(f, grid[i], f0, grid[i + 1], max_iter))
    if vals[-1] == 0.0:
        roots.append(grid[-1])
    return roots


def solve_transcendental(
    branch: Branch,
    inv: GeodesicInvariants,
    window: tuple[float, float],
    cfg: SolverConfig = SolverConfig(),
) -> list[float]:
    """All nonzero roots of the A1/A2/B1/B2 equation inside ``window``."""
    branch = Branch(branch)
    if branch not in _EQUATIONS:
        raise ValueError(f"{branch.value} is not a transcendental branch")
    sign = inv.center_sign
    if branch in (Branch.A1, Branch.A2) and sign <= 0:
        raise WrongCausalClass("A-branches need a timelike central component (a > 0)")
    if branch in (Branch.B1, Branch.B2) and sign >= 0:
        raise WrongCausalClass("B-branches need a spacelike central component (a < 0)")
    if branch in (Branch.A2, Branch.B2):
        if inv.p < 2:
            raise CenterTooSmall("A2/B2 require dim z >= 2")
        _ratio(inv)

    eq = _EQUATIONS[branch]
    f = lambda t: eq(inv, t)[0]
    lo, hi = window
    if sign > 0:
        step = inv.period / cfg.grid_per_period
    else:
        step = 1.0 / (inv.beta * cfg.grid_per_period)

    # every equation is odd in t: solve on the positive axis and mirror
    roots = _positive_roots(f, max(hi, -lo), step, cfg.max_bisections)
    return sorted({t for t in roots if lo <= t <= hi} | {-t for t in roots if lo <= -t <= hi})


def multiplicity(inv: GeodesicInvariants, t0: float, membership) -> int:
    """Multiplicity of a conjugate point from the set(s) it belongs to."""
    members = {Branch(m) for m in membership}
    if not members:
        raise InconsistentMembership("empty membership")
    a_set = {Branch.A1, Branch.A2}
    b_set = {Branch.B1, Branch.B2}
    if members & {Branch.PURE_CENTER, Branch.PURE_V, Branch.NULL_CENTER}:
        if len(members) != 1:
            raise InconsistentMembership(f"cannot combine {sorted(m.value for m in members)}")
        (only,) = members
        if only is Branch.PURE_CENTER:
            return inv.q
        if only is Branch.PURE_V:
            return inv.p
        return inv.p - 1
    if members & a_set and members & b_set:
        raise InconsistentMembership("A and B branches are mutually exclusive")
    if Branch.LATTICE in members:
        if inv.center_sign <= 0 or members & b_set:
            raise InconsistentMembership("lattice points need a timelike central component")
        # lattice rule takes precedence over any coincident A-branch membership
        return inv.p + inv.q - 2 if _denominator_vanishes(inv) else inv.q - 1
    if members & a_set and inv.center_sign <= 0:
        raise InconsistentMembership("A-branches need a > 0")
    if members & b_set and inv.center_sign >= 0:
        raise InconsistentMembership("B-branches need a < 0")
    first = members & {Branch.A1, Branch.B1}
    second = members & {Branch.A2, Branch.B2}
    if first and second:
        return inv.p
    if second:
        return inv.p - 1
    return 1


def _lattice(inv, lo, hi):
    step = 2 * math.pi / inv.alpha
    k_lo = math.ceil(lo / step)
    k_hi = math.floor(hi / step)
    return [k * step for k in range(k_lo, k_hi + 1) if k != 0]


def _quadratic_points(inv, lo, hi):
    if inv.b >= 0:
        return []
    r = math.sqrt(-12.0 / inv.b)
    return [t for t in (-r, r) if lo <= t <= hi]


def analytic_conjugate_points(
    inv: GeodesicInvariants,
    window: tuple[float, float] | None = None,
    cfg: SolverConfig = SolverConfig(),
) -> list[ConjugatePoint]:
    """Conjugate points with multiplicities inside ``window`` (``t = 0`` excluded)."""
    lo, hi = default_window(inv) if window is None else window
    flags: tuple[str, ...] = ()
    if abs(inv.g) <= inv.null_tol:
        flags = ("null-geodesic: closed-form loci assume a nonnull velocity",)

    if inv.z0_zero:
        pts = [(t, Branch.PURE_V) for t in _quadratic_points(inv, lo, hi)]
        return [_point(inv, t, {b}, flags) for t, b in pts]
    if inv.x0_zero:
        if inv.center_sign <= 0:
            return []
        return [_point(inv, t, {Branch.PURE_CENTER}, flags) for t in _lattice(inv, lo, hi)]

    sign = inv.center_sign
    if sign == 0:
        return [_point(inv, t, {Branch.NULL_CENTER}, flags) for t in _quadratic_points(inv, lo, hi)]

    null_x0 = abs(inv.b) <= inv.null_tol * max(1.0, abs(inv.a))
    candidates: list[tuple[float, Branch]] = []
    if sign > 0:
        candidates += [(t, Branch.LATTICE) for t in _lattice(inv, lo, hi)]
        first, second = Branch.A1, Branch.A2
    else:
        first, second = Branch.B1, Branch.B2
    if null_x0:
        # first equation collapses to g sin(u) = 0, i.e. the lattice itself
        flags = flags + ("null x0: folded into lattice",)
    else:
        candidates += [(t, first) for t in solve_transcendental(first, inv, (lo, hi), cfg)]
    if inv.p >= 2 and not _denominator_vanishes(inv) and not null_x0:
        candidates += [(t, second) for t in solve_transcendental(second, inv, (lo, hi), cfg)]
    elif inv.p >= 2 and _denominator_vanishes(inv):
        flags = flags + ("g + a = 0: second transcendental set undefined",)

    merge_tol = cfg.merge_tol_rel * inv.period
    candidates.sort()
    out = []
    i = 0
    while i < len(candidates):
        group = [candidates[i]]
        while i + 1 < len(candidates) and candidates[i + 1][0] - group[0][0] <= merge_tol:
            i += 1
            group.append(candidates[i])
        i += 1
        members = {b for _, b in group}
        t0 = next((t for t, b in group if b is Branch.LATTICE), group[0][0])
        extra = flags
        if Branch.LATTICE in members and len(members) > 1:
            extra = extra + ("lattice coincides with a transcendental root: lattice multiplicity used",)
        out.append(_point(inv, t0, members, extra))
    return out


def _combined_branch(members: set[Branch]) -> Branch:
    if Branch.LATTICE in members:
        return Branch.LATTICE
    if members == {Branch.A1, Branch.A2}:
        return Branch.A1_A2
    if members == {Branch.B1, Branch.B2}:
        return Branch.B1_B2
    (only,) = members
    return only


def _point(inv, t, members, flags) -> ConjugatePoint:
    branch = _combined_branch(set(members))
    return ConjugatePoint(
        t0=float(t),
        multiplicity=multiplicity(inv, t, members),
        branch=branch,
        residual=branch_residual(branch, inv, t),
        flags=tuple(flags),
    )
