import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from pseudoh import (
    IntegratorConfig,
    analytic_conjugate_points,
    catalog,
    cross_validate,
    detect_conjugate_points,
    geodesic_invariants,
    integrate_jacobi_basis,
    jacobi_system_rhs,
    make_ic,
)
from pseudoh.analytic import Branch, ConjugatePoint
from pseudoh.numeric import JacobiFlow, endpoint_matrix


@pytest.fixture
def ex1():
    return catalog.example_singular(1)


def test_endpoint_matrix_logdet_and_sign(rng):
    for _ in range(20):
        M = rng.standard_normal((5, 5))
        e = endpoint_matrix(0.0, M)
        sign, logdet = np.linalg.slogdet(M)
        assert e.det_sign == sign
        assert e.logdet == pytest.approx(logdet, abs=1e-12)
        s = np.linalg.svd(M, compute_uv=False)
        assert e.smin_rel == pytest.approx(s[-1] / s[0])
    e = endpoint_matrix(0.0, np.zeros((3, 3)))
    assert e.det_sign == 0.0 and e.logdet == -math.inf and e.smin_rel == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")
    with pytest.raises(ValueError):
        IntegratorConfig(scan_points_per_period=16)
    with pytest.raises(ValueError):
        IntegratorConfig(rank_tol=0.0)


def test_flow_matches_independent_integration(ex1, rng):
    # kernel path (connection / curvature tensors, integrated velocity) against
    # solve_ivp on the closed-form velocity and Jacobi operator
    ic = make_ic(ex1, [0.4, 0.9, -0.3], rng.standard_normal(4))
    flow = JacobiFlow(ex1, ic)
    n = ex1.dim
    cols = rng.standard_normal((n, 2))
    states = flow.propagate(0.0, flow.initial_state(cols), [0.7, 1.9])
    _, Y, P = flow.split(states)

    def f(t, y):
        out = []
        for c in range(2):
            Yc = ex1.from_array(y[c * 2 * n : c * 2 * n + n])
            Pc = ex1.from_array(y[c * 2 * n + n : (c + 1) * 2 * n])
            dY, dP = jacobi_system_rhs(ex1, ic, t, Yc, Pc)
            out += [dY.to_array(), dP.to_array()]
        return np.concatenate(out)

    y0 = np.concatenate([np.r_[np.zeros(n), cols[:, c]] for c in range(2)])
    sol = solve_ivp(f, (0, 1.9), y0, t_eval=[0.7, 1.9], rtol=1e-11, atol=1e-13)
    for k in range(2):
        for c in range(2):
            np.testing.assert_allclose(Y[k][:, c], sol.y[c * 2 * n : c * 2 * n + n, k], atol=1e-8)
            np.testing.assert_allclose(P[k][:, c], sol.y[c * 2 * n + n : (c + 1) * 2 * n, k], atol=1e-8)


def test_integrated_velocity_matches_closed_form(ex1, rng):
    from pseudoh import geodesic_velocity

    ic = make_ic(ex1, [0.0, 1.0, 0.0], rng.standard_normal(4))
    flow = JacobiFlow(ex1, ic)
    ts = [0.5, 1.0, 3.0]
    w, _, _ = flow.split(flow.propagate(0.0, flow.initial_state(), ts))
    for t, wt in zip(ts, w):
        np.testing.assert_allclose(wt, geodesic_velocity(ex1, ic, t).v_part, rtol=1e-8)


def test_linearity_in_initial_data(ex1, rng):
    ic = make_ic(ex1, [1.0, 0.2, 0.1], rng.standard_normal(4))
    flow = JacobiFlow(ex1, ic)
    n = ex1.dim
    A, B = rng.standard_normal(n), rng.standard_normal(n)
    s = 2.7
    _, Y, _ = flow.split(flow.propagate(0.0, flow.initial_state(np.c_[A, B, A + s * B]), [3.0])[0])
    np.testing.assert_allclose(Y[:, 2], Y[:, 0] + s * Y[:, 1], atol=1e-8)


def test_lagrangian_invariant(ex1, rng):
    # Y(0) = 0 makes Y^T G P symmetric for all t (the symplectic form vanishes)
    ic = make_ic(ex1, [0.3, 1.0, 0.5], rng.standard_normal(4))
    flow = JacobiFlow(ex1, ic)
    _, Y, P = flow.split(flow.propagate(0.0, flow.initial_state(), [1.0, 4.0]))
    G = ex1.metric
    for k in range(2):
        W = Y[k].T @ G @ P[k]
        np.testing.assert_allclose(W, W.T, atol=1e-7 * (1 + np.abs(W).max()))


def test_velocity_is_always_a_jacobi_field(ex1, rng):
    # J(t) = t gamma'(t) vanishes at 0 and never again, so it is a column of M(t) times t
    ic = make_ic(ex1, [1.0, 0.5, 0.0], rng.standard_normal(4))
    flow = JacobiFlow(ex1, ic)
    v0 = ic.velocity.to_array()
    w, Y, _ = flow.split(flow.propagate(0.0, flow.initial_state(v0[:, None]), [2.0])[0])
    np.testing.assert_allclose(Y[:, 0], 2.0 * np.r_[ic.z0.z_part, w], atol=1e-8)


def _points(alg, z0, x0, window, **kw):
    return detect_conjugate_points(alg, make_ic(alg, z0, x0), window, IntegratorConfig(**kw))


def test_detects_heisenberg_pure_center():
    alg = catalog.heisenberg_h_type(1)
    pts = _points(alg, [1.0], [0.0, 0.0], (0.1, 20.0))
    assert [p.t0 for p in pts] == pytest.approx([2 * math.pi, 4 * math.pi, 6 * math.pi], abs=1e-7)
    assert [p.multiplicity for p in pts] == [2, 2, 2]
    assert all(p.branch is Branch.NUMERIC for p in pts)


def test_a2_points_cross_validate(ex1):
    ic = make_ic(ex1, [1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 1.5])
    window = (0.1, 13.0)
    ana = analytic_conjugate_points(geodesic_invariants(ex1, ic), window)
    num = detect_conjugate_points(ex1, ic, window)
    rep = cross_validate(ana, num)
    assert rep.ok, rep.rows()
    assert {a.branch for a, _ in rep.matched} >= {Branch.A2, Branch.LATTICE}


def test_pure_v_cross_validates(ex1):
    ic = make_ic(ex1, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 1.0])
    window = (0.1, 5.0)
    ana = analytic_conjugate_points(geodesic_invariants(ex1, ic), window)
    num = detect_conjugate_points(ex1, ic, window)
    rep = cross_validate(ana, num)
    assert rep.ok, rep.rows()
    assert rep.matched[0][1].multiplicity == 3


def test_riemannian_geodesic_has_no_points_early():
    alg = catalog.heisenberg_h_type(1)
    assert _points(alg, [1.0], [1.0, 0.0], (0.1, 6.0)) == []


def test_negative_window_rejected(ex1):
    with pytest.raises(ValueError):
        _points(ex1, [1.0, 0, 0], [1.0, 0, 0, 0], (-1.0, 2.0))


def test_determinism(ex1):
    a = _points(ex1, [0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0], (0.1, 6.0))
    b = _points(ex1, [0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0], (0.1, 6.0))
    assert a == b


def test_grid_refinement_does_not_change_points():
    alg = catalog.heisenberg_h_type(1)
    coarse = _points(alg, [1.0], [1.0, 0.0], (0.1, 20.0), scan_points_per_period=32)
    fine = _points(alg, [1.0], [1.0, 0.0], (0.1, 20.0), scan_points_per_period=128)
    assert len(coarse) == len(fine) > 0
    assert [p.t0 for p in coarse] == pytest.approx([p.t0 for p in fine], abs=1e-7)


def test_rk4_agrees_with_adaptive():
    alg = catalog.heisenberg_h_type(1)
    rk45 = _points(alg, [1.0], [1.0, 0.0], (0.1, 10 * math.pi))
    rk4 = _points(alg, [1.0], [1.0, 0.0], (0.1, 10 * math.pi), method="rk4")
    assert [p.t0 for p in rk4] == pytest.approx([p.t0 for p in rk45], abs=1e-6)
    assert [p.multiplicity for p in rk4] == [p.multiplicity for p in rk45]


def test_integrate_jacobi_basis_grid(ex1):
    ic = make_ic(ex1, [1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0])
    mats = integrate_jacobi_basis(ex1, ic, (0.5, 2.0))
    assert mats[0].t == 0.5 and mats[-1].t == 2.0
    assert all(m.M.shape == (7, 7) for m in mats)


def test_cross_validate_bookkeeping():
    a = [ConjugatePoint(1.0, 2, Branch.A1), ConjugatePoint(2.0, 1, Branch.A1)]
    n = [ConjugatePoint(1.0 + 1e-8, 1, Branch.NUMERIC), ConjugatePoint(3.0, 1, Branch.NUMERIC)]
    rep = cross_validate(a, n)
    assert len(rep.matched) == 1 and len(rep.analytic_only) == 1 and len(rep.numeric_only) == 1
    assert rep.mismatches == 3 and rep.exit_status == 1
    assert cross_validate(a, n, mult_strict=False).mismatches == 2
    assert cross_validate(a[:1], n[:1], mult_strict=False).ok
    statuses = [r["status"] for r in rep.rows()]
    assert statuses == ["matched", "analytic-only", "numeric-only"]


def test_numeric_default_window():
    from pseudoh import GeodesicInvariants, numeric_default_window
    from pseudoh.analytic import default_window

    hyp = GeodesicInvariants.from_scalars(-4.0, -1.0, 3, 4)
    assert numeric_default_window(hyp) == (0.0, 4.0)
    ell = GeodesicInvariants.from_scalars(4.0, -1.0, 3, 4)
    assert numeric_default_window(ell) == default_window(ell)


def test_exponential_growth_does_not_stall_the_step_size(ex1):
    # spacelike center: entries reach ~1e10 by t = 12; a per-component error
    # norm would stall on rounding noise in the small entries
    ic = make_ic(ex1, [0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0])
    flow = JacobiFlow(ex1, ic, IntegratorConfig(max_steps=20_000))
    out = flow.propagate(0.0, flow.initial_state(), [12.0])
    assert np.abs(out).max() > 1e9


def test_null_x0_lattice_cross_validates(ex1):
    ic = make_ic(ex1, [1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0])  # <x1, x1> = 0
    window = (0.1, 13.0)
    ana = analytic_conjugate_points(geodesic_invariants(ex1, ic), window)
    assert all("null x0" in " ".join(p.flags) for p in ana)
    rep = cross_validate(ana, detect_conjugate_points(ex1, ic, window))
    assert rep.ok and len(rep.matched) == 2
