import numpy as np
import pytest

from pseudoh import catalog


@pytest.fixture(params=catalog.DEFAULT_NAMES)
def catalog_alg(request):
    return catalog.by_name(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_metric_algebra(rng, p, q, signature_z=None, signature_v=None):
    """Generic (not pseudo-H) metric 2-step algebra with a random structure tensor."""
    from pseudoh import validate_algebra

    c = rng.standard_normal((q, q, p))
    c = c - c.transpose(1, 0, 2)
    sz = signature_z if signature_z is not None else np.where(np.arange(p) % 2, -1.0, 1.0)
    sv = signature_v if signature_v is not None else np.where(np.arange(q) % 3 == 2, -1.0, 1.0)
    # conjugate a diagonal signature by a random well-conditioned change of basis
    az = np.eye(p) + 0.3 * rng.standard_normal((p, p))
    av = np.eye(q) + 0.3 * rng.standard_normal((q, q))
    raw = {
        "dim_center": p,
        "dim_v": q,
        "metric_center": az.T @ np.diag(sz) @ az,
        "metric_v": av.T @ np.diag(sv) @ av,
        "structure": c,
    }
    raw["metric_center"] = 0.5 * (raw["metric_center"] + raw["metric_center"].T)
    raw["metric_v"] = 0.5 * (raw["metric_v"] + raw["metric_v"].T)
    return validate_algebra(raw, name="random")
