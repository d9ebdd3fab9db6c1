import json

import numpy as np
import pytest

from pseudoh import (
    analytic_conjugate_points,
    catalog,
    geodesic_invariants,
    is_pseudo_h_type,
    is_pseudoregular,
    make_ic,
)
from pseudoh.geometry import curvature_tensor
from pseudoh.identities import run_suites
from pseudoh.report import dump_algebra, load_algebra


@pytest.mark.parametrize("name", catalog.DEFAULT_NAMES)
def test_export_reload_round_trip(name, tmp_path):
    alg = catalog.by_name(name)
    path = tmp_path / f"{name}.json"
    path.write_text(dump_algebra(alg))
    back = load_algebra(str(path))
    assert back.name == alg.name
    for attr in ("metric_center", "metric_v", "structure"):
        np.testing.assert_array_equal(getattr(back, attr), getattr(alg, attr))
    np.testing.assert_array_equal(back.j_basis, alg.j_basis)
    np.testing.assert_array_equal(curvature_tensor(back), curvature_tensor(alg))
    assert is_pseudo_h_type(back) == is_pseudo_h_type(alg)
    assert is_pseudoregular(back) == is_pseudoregular(alg)
    assert [r.max_error for r in run_suites(back, samples=5)] == pytest.approx(
        [r.max_error for r in run_suites(alg, samples=5)], nan_ok=True
    )


def test_round_trip_conjugate_points(tmp_path):
    alg = catalog.example_singular(2)
    path = tmp_path / "a.json"
    path.write_text(dump_algebra(alg))
    back = load_algebra(str(path))
    x0 = np.r_[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0]
    pts = [analytic_conjugate_points(geodesic_invariants(a, make_ic(a, [1, 0.2, 0], x0)), (0.1, 20)) for a in (alg, back)]
    assert pts[0] == pts[1]


def test_export_is_pair_list_json():
    data = json.loads(dump_algebra(catalog.heisenberg_h_type(2)))
    assert data["structure"] == [{"a": 0, "b": 2, "z": [1]}, {"a": 1, "b": 3, "z": [1]}]


def test_names():
    assert catalog.by_name("example1").name == "example1-k1"
    assert catalog.by_name("heisenberg3").dim_v == 6
    assert catalog.by_name("example1-k2").dim_v == 8
    with pytest.raises(KeyError):
        catalog.by_name("nope")
    with pytest.raises(ValueError):
        catalog.example_singular(0)


def test_example1_metric_signature():
    alg = catalog.example_singular(1)
    ev_v = np.linalg.eigvalsh(alg.metric_v)
    assert (ev_v > 0).sum() == 2 and (ev_v < 0).sum() == 2
    np.testing.assert_array_equal(alg.metric_center, np.diag([1.0, -1.0, -1.0]))


def test_claims_hold(catalog_alg, rng):
    for _, check in catalog.claims(catalog_alg):
        assert check(catalog_alg, rng, 50) < 1e-12


def test_describe():
    alg = catalog.example_singular(1)
    assert catalog.describe(alg, alg.vector(v=[1, 0, 0, 1.5])) == "x1 + 1.5 w1"
    assert catalog.describe(alg, alg.vector(z=[1, -1, 0])) == "z1 - z2"
    assert catalog.describe(alg, alg.vector()) == "0"
    h = catalog.heisenberg_h_type(1)
    assert catalog.basis_labels(h) == (["z"], ["e1", "e2"])
