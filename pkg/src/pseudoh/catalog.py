"""Built-in algebras: the singular pseudo-H family, the non-pseudoregular
4-dimensional algebra, and the Riemannian Heisenberg baseline.

Basis orders are fixed so that coordinate strings on the command line and CSV
outputs stay comparable between runs:

* ``example_singular(k)``: center ``(z1, z2, z3)``; ``v`` ordered
  ``x_1..x_k, y_1..y_k, v_1..v_k, w_1..w_k``.
* ``example_nonpseudoregular()``: center ``(z1, z2)``; ``v = (e1, e2)``.
* ``heisenberg_h_type(m)``: center ``(z,)``; ``v = (e_1..e_m, e_{m+1}..e_{2m})``.
"""
from __future__ import annotations

import re
from typing import Callable

import numpy as np

from .algebra import MetricNilpotentAlgebra, j_matrix, validate_algebra


def example_singular(k: int = 1) -> MetricNilpotentAlgebra:
    if k < 1:
        raise ValueError("k must be at least 1")
    q = 4 * k
    x = lambda i: i
    y = lambda i: k + i
    v = lambda i: 2 * k + i
    w = lambda i: 3 * k + i

    g_v = np.zeros((q, q))
    structure = []
    for i in range(k):
        g_v[x(i), w(i)] = g_v[w(i), x(i)] = -1.0
        g_v[y(i), v(i)] = g_v[v(i), y(i)] = 1.0
        structure += [
            {"a": x(i), "b": v(i), "z": [0.5, -0.5, 0.0]},
            {"a": x(i), "b": w(i), "z": [0.0, 0.0, 1.0]},
            {"a": y(i), "b": v(i), "z": [0.0, 0.0, 1.0]},
            {"a": y(i), "b": w(i), "z": [2.0, 2.0, 0.0]},
        ]
    raw = {
        "dim_center": 3,
        "dim_v": q,
        "metric_center": np.diag([1.0, -1.0, -1.0]),
        "metric_v": g_v,
        "structure": structure,
        "pseudo_h": True,
    }
    return validate_algebra(raw, name=f"example1-k{k}")


def example_nonpseudoregular() -> MetricNilpotentAlgebra:
    raw = {
        "dim_center": 2,
        "dim_v": 2,
        "metric_center": np.diag([1.0, -1.0]),
        "metric_v": np.eye(2),
        "structure": [{"a": 0, "b": 1, "z": [1.0, -1.0]}],
    }
    return validate_algebra(raw, name="example2")


def heisenberg_h_type(m: int = 1) -> MetricNilpotentAlgebra:
    if m < 1:
        raise ValueError("m must be at least 1")
    raw = {
        "dim_center": 1,
        "dim_v": 2 * m,
        "metric_center": [[1.0]],
        "metric_v": np.eye(2 * m),
        "structure": [{"a": i, "b": m + i, "z": [1.0]} for i in range(m)],
        "pseudo_h": True,
    }
    return validate_algebra(raw, name=f"heisenberg{m}")


_PATTERNS: list[tuple[str, Callable[..., MetricNilpotentAlgebra]]] = [
    (r"example1-k(\d+)", lambda k: example_singular(int(k))),
    (r"example1", lambda: example_singular(1)),
    (r"example2", example_nonpseudoregular),
    (r"heisenberg(\d+)", lambda m: heisenberg_h_type(int(m))),
]

DEFAULT_NAMES = ("heisenberg1", "heisenberg2", "example1-k1", "example1-k2", "example1-k3", "example2")


def by_name(name: str) -> MetricNilpotentAlgebra:
    for pattern, build in _PATTERNS:
        m = re.fullmatch(pattern, name)
        if m:
            return build(*m.groups())
    raise KeyError(f"unknown catalog algebra {name!r}")


def _singular_claim(alg: MetricNilpotentAlgebra, rng: np.random.Generator, samples: int) -> float:
    worst = 0.0
    eye = np.eye(alg.dim_v)
    for a, b, c in rng.standard_normal((samples, 3)):
        j = j_matrix(alg, [a, b, c])
        worst = max(worst, np.abs(j @ j + (a * a - b * b - c * c) * eye).max())
    return float(worst)


def _nonpseudoregular_claim(alg: MetricNilpotentAlgebra, rng, samples) -> float:
    j = j_matrix(alg, [1.0, 1.0])
    return float(np.abs(j @ j + 4.0 * np.eye(2)).max())


def claims(alg: MetricNilpotentAlgebra) -> list[tuple[str, Callable]]:
    """Closed-form identities stated for the named examples.

    Each entry is ``(label, check)`` where ``check(alg, rng, samples)`` returns
    the maximum entrywise error.
    """
    if alg.name.startswith("example1"):
        return [("J^2_{a z1 + b z2 + c z3} = -(a^2 - b^2 - c^2) I", _singular_claim)]
    if alg.name == "example2":
        return [("J^2_{z1 + z2} = -4 I", _nonpseudoregular_claim)]
    return []


def basis_labels(alg: MetricNilpotentAlgebra) -> tuple[list[str], list[str]]:
    """Names of the center and ``v`` basis vectors, in coordinate order."""
    p, q = alg.dim_center, alg.dim_v
    center = [f"z{k + 1}" for k in range(p)]
    m = re.fullmatch(r"example1(?:-k(\d+))?", alg.name)
    if m and q % 4 == 0 and p == 3:
        k = q // 4
        return center, [f"{s}{i + 1}" for s in "xyvw" for i in range(k)]
    if alg.name.startswith("heisenberg") and p == 1:
        center = ["z"]
    return center, [f"e{a + 1}" for a in range(q)]


def describe(alg: MetricNilpotentAlgebra, vec) -> str:
    """Linear combination of named basis vectors, e.g. ``'x1 + 1.5 w1'``."""
    zl, vl = basis_labels(alg)
    parts = []
    for label, c in zip(zl + vl, vec.to_array()):
        if c == 0:
            continue
        coef = "" if c == 1 else "-" if c == -1 else f"{c:g} "
        parts.append(f"{coef}{label}")
    if not parts:
        return "0"
    return " + ".join(parts).replace("+ -", "- ")
