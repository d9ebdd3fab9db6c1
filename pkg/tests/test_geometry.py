import math

import numpy as np
import pytest
import scipy.linalg
from scipy.integrate import solve_ivp

from pseudoh import (
    bracket,
    catalog,
    connection,
    curvature,
    exp_tJ,
    geodesic_velocity,
    inner,
    is_totally_geodesic_subalgebra,
    jacobi_operator_along,
    make_ic,
)
from pseudoh.algebra import j_operator
from pseudoh.errors import DependentBasis, NonCentralInput
from pseudoh.geometry import connection_tensor, covariant_derivative, curvature_tensor

from conftest import random_metric_algebra


def koszul(alg, X, Y):
    """Levi-Civita connection of left-invariant fields from the Koszul formula."""
    G = alg.metric
    n = alg.dim
    E = [alg.from_array(e) for e in np.eye(n)]
    br = lambda u, w: bracket(alg, u, w).to_array()
    x, y = X.to_array(), Y.to_array()
    low = np.array([
        0.5 * (br(X, Y) @ G @ e.to_array() - br(Y, e) @ G @ x + br(e, X) @ G @ y)
        for e in E
    ])
    return alg.from_array(np.linalg.solve(G, low))


def koszul_curvature(alg, X, Y, Z):
    nab = lambda u, w: koszul(alg, u, w)
    return nab(X, nab(Y, Z)) - nab(Y, nab(X, Z)) - nab(bracket(alg, X, Y), Z)


@pytest.fixture
def h3():
    return catalog.heisenberg_h_type(1)


def _rand(alg, rng):
    return alg.from_array(rng.standard_normal(alg.dim))


def test_connection_heisenberg_values(h3):
    z, e1, e2 = h3.z_basis(0), h3.v_basis(0), h3.v_basis(1)
    np.testing.assert_allclose(connection(h3, e1, e2).to_array(), [0.5, 0, 0])
    np.testing.assert_allclose(connection(h3, z, z).to_array(), 0.0)
    np.testing.assert_allclose(connection(h3, z, e1).to_array(), [0, 0, -0.5])
    np.testing.assert_allclose(connection(h3, e1, z).to_array(), [0, 0, -0.5])


@pytest.mark.parametrize("name", catalog.DEFAULT_NAMES)
def test_connection_matches_koszul(name, rng):
    alg = catalog.by_name(name)
    for _ in range(10):
        X, Y = _rand(alg, rng), _rand(alg, rng)
        np.testing.assert_allclose(connection(alg, X, Y).to_array(), koszul(alg, X, Y).to_array(), atol=1e-12)


def test_connection_matches_koszul_generic_metric(rng):
    alg = random_metric_algebra(rng, 2, 4)
    for _ in range(10):
        X, Y = _rand(alg, rng), _rand(alg, rng)
        np.testing.assert_allclose(connection(alg, X, Y).to_array(), koszul(alg, X, Y).to_array(), atol=1e-10)


@pytest.mark.parametrize("name", ["heisenberg2", "example1-k1", "example2"])
def test_curvature_matches_koszul(name, rng):
    alg = catalog.by_name(name)
    for _ in range(10):
        X, Y, Z = (_rand(alg, rng) for _ in range(3))
        np.testing.assert_allclose(
            curvature(alg, X, Y, Z).to_array(), koszul_curvature(alg, X, Y, Z).to_array(), atol=1e-11
        )


def test_curvature_matches_koszul_generic_metric(rng):
    alg = random_metric_algebra(rng, 2, 4)
    for _ in range(5):
        X, Y, Z = (_rand(alg, rng) for _ in range(3))
        np.testing.assert_allclose(
            curvature(alg, X, Y, Z).to_array(), koszul_curvature(alg, X, Y, Z).to_array(), atol=1e-9
        )


def test_curvature_examples(h3, rng):
    z, e1 = h3.z_basis(0), h3.v_basis(0)
    np.testing.assert_allclose(curvature(h3, z, e1, z).to_array(), [0, -0.25, 0])
    alg = catalog.example_singular(1)
    zs = [alg.vector(z=rng.standard_normal(3)) for _ in range(3)]
    np.testing.assert_allclose(curvature(alg, *zs).to_array(), 0.0, atol=1e-15)
    X, Z = _rand(alg, rng), _rand(alg, rng)
    np.testing.assert_allclose(curvature(alg, X, X, Z).to_array(), 0.0, atol=1e-12)


@pytest.mark.parametrize("name", catalog.DEFAULT_NAMES)
def test_jacobi_operator_two_paths_agree(name, rng):
    alg = catalog.by_name(name)
    for _ in range(50):
        ic = make_ic(alg, rng.standard_normal(alg.dim_center), rng.standard_normal(alg.dim_v))
        t = rng.uniform(-3, 3)
        Y = _rand(alg, rng)
        gd = geodesic_velocity(alg, ic, t)
        np.testing.assert_allclose(
            jacobi_operator_along(alg, ic, t, Y).to_array(), curvature(alg, Y, gd, gd).to_array(), atol=1e-10
        )


def test_jacobi_operator_kills_velocity(rng):
    alg = catalog.example_singular(1)
    ic = make_ic(alg, [1.0, 0.3, 0.2], rng.standard_normal(4))
    gd = geodesic_velocity(alg, ic, 0.7)
    np.testing.assert_allclose(jacobi_operator_along(alg, ic, 0.7, gd).to_array(), 0.0, atol=1e-12)


def test_jacobi_operator_without_v_component(rng):
    alg = catalog.example_singular(1)
    ic = make_ic(alg, [1.0, 0.3, 0.2], np.zeros(4))
    x = rng.standard_normal(4)
    J = j_operator(alg, ic.z0)
    out = jacobi_operator_along(alg, ic, 1.3, alg.vector(v=x))
    np.testing.assert_allclose(out.v_part, -0.25 * J @ J @ x, atol=1e-12)
    np.testing.assert_allclose(out.z_part, 0.0, atol=1e-12)


@pytest.mark.parametrize("z0", [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.3, 2.0, -1.0]])
def test_exp_closed_form_matches_expm(z0):
    alg = catalog.example_singular(1)
    ic = make_ic(alg, z0, [1.0, 0.0, 0.0, 0.0])
    J = j_operator(alg, ic.z0)
    for t in (0.0, 0.4, -1.7, 3.0):
        np.testing.assert_allclose(exp_tJ(alg, ic, t), scipy.linalg.expm(t * J), atol=1e-12, rtol=1e-12)


def test_exp_period_and_null_case(h3):
    ic = make_ic(h3, [1.0], [1.0, 0.0])
    np.testing.assert_allclose(exp_tJ(h3, ic, 2 * math.pi), np.eye(2), atol=1e-14)
    np.testing.assert_array_equal(exp_tJ(h3, ic, 0.0), np.eye(2))
    alg = catalog.example_singular(1)
    ic = make_ic(alg, [1.0, 1.0, 0.0], [1.0, 0, 0, 0])
    E = exp_tJ(alg, ic, 2.5)
    J = j_operator(alg, ic.z0)
    np.testing.assert_allclose(E, np.eye(4) + 2.5 * J, atol=1e-14)
    np.testing.assert_allclose((E - np.eye(4)) @ (E - np.eye(4)), 0.0, atol=1e-12)


def test_exp_generic_algebra_uses_matrix_exponential(rng):
    alg = catalog.example_nonpseudoregular()
    ic = make_ic(alg, [1.0, 1.0], [1.0, 0.0])
    J = j_operator(alg, ic.z0)
    np.testing.assert_allclose(exp_tJ(alg, ic, 0.8), scipy.linalg.expm(0.8 * J), atol=1e-14)


def test_ic_scalars_and_central_check():
    alg = catalog.example_singular(1)
    ic = make_ic(alg, [1.0, 2.0, 0.0], [1.0, 0.0, 0.0, 1.0])
    assert ic.a == pytest.approx(inner(alg, ic.z0, ic.z0), abs=1e-12) == -3.0
    assert ic.b == -2.0 and ic.g == -5.0
    with pytest.raises(NonCentralInput):
        make_ic(alg, alg.v_basis(0), [0, 0, 0, 0])


@pytest.mark.parametrize("name", ["heisenberg2", "example1-k1", "example2"])
def test_velocity_solves_geodesic_equation(name, rng):
    alg = catalog.by_name(name)
    ic = make_ic(alg, rng.standard_normal(alg.dim_center), rng.standard_normal(alg.dim_v))

    # independent: in the left-invariant frame a geodesic satisfies u' = -nabla_u u
    def f(t, u):
        U = alg.from_array(u)
        return -koszul(alg, U, U).to_array()

    sol = solve_ivp(f, (0, 2.0), ic.velocity.to_array(), rtol=1e-11, atol=1e-13, dense_output=True)
    for t in np.linspace(0, 2.0, 9):
        gd = geodesic_velocity(alg, ic, t)
        np.testing.assert_allclose(gd.to_array(), sol.sol(t), atol=1e-8)
        if name != "example2":
            assert inner(alg, gd, gd) == pytest.approx(ic.g, abs=1e-10)


def test_covariant_derivative_of_metric_vanishes(rng):
    # nabla of the identity (1,1) tensor is zero for any connection
    alg = catalog.example_singular(1)
    conn = connection_tensor(alg)
    np.testing.assert_allclose(covariant_derivative(np.eye(alg.dim), conn), 0.0, atol=1e-14)


def test_curvature_tensor_matches_pointwise(rng):
    alg = catalog.heisenberg_h_type(2)
    R = curvature_tensor(alg)
    X, Y, Z = (_rand(alg, rng) for _ in range(3))
    direct = curvature(alg, X, Y, Z).to_array()
    via = np.einsum("i,j,k,ijkl->l", X.to_array(), Y.to_array(), Z.to_array(), R)
    np.testing.assert_allclose(via, direct, atol=1e-12)


def test_heisenberg_is_not_symmetric_space():
    alg = catalog.heisenberg_h_type(1)
    dR = covariant_derivative(curvature_tensor(alg), connection_tensor(alg))
    assert np.abs(dR).max() > 0.1


def test_totally_geodesic_examples(h3, rng):
    z, e1, e2 = h3.z_basis(0), h3.v_basis(0), h3.v_basis(1)
    assert is_totally_geodesic_subalgebra(h3, [z, e1, e2])
    res = is_totally_geodesic_subalgebra(h3, [e1, e2])
    assert not res and not res.bracket_closed
    assert not is_totally_geodesic_subalgebra(h3, [z, e1])
    # a single direction always spans a geodesic
    assert is_totally_geodesic_subalgebra(h3, [e1 + z])

    alg = catalog.example_nonpseudoregular()
    for _ in range(5):
        x0 = alg.vector(v=rng.standard_normal(2))
        res = is_totally_geodesic_subalgebra(alg, [x0, alg.z_basis(0), alg.z_basis(1)])
        assert res.totally_geodesic
        assert res.bracket_closed and not res.subgroup
        assert res.curvature_invariant


def test_totally_geodesic_dependent_basis(h3):
    e1 = h3.v_basis(0)
    with pytest.raises(DependentBasis):
        is_totally_geodesic_subalgebra(h3, [e1, e1 * 2.0])
    with pytest.raises(DependentBasis):
        is_totally_geodesic_subalgebra(h3, [])


def test_totally_geodesic_degenerate_span_is_flagged():
    alg = catalog.example_nonpseudoregular()
    res = is_totally_geodesic_subalgebra(alg, [alg.vector(z=[1.0, 1.0])])
    assert res.degenerate
    assert "degenerate" in res.note
