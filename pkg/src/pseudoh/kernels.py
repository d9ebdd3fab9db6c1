"""Backend selection for the Jacobi-flow propagator.

The compiled extension is picked at import when it was built; otherwise the
numpy implementation in ``_fallback`` is used.  :func:`use_backend` switches
explicitly (tests and the benchmark compare both).
"""
from . import _fallback

try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None

STATUS_OK = _fallback.STATUS_OK
STATUS_STEP_UNDERFLOW = _fallback.STATUS_STEP_UNDERFLOW
STATUS_MAX_STEPS = _fallback.STATUS_MAX_STEPS

BACKENDS = {"python": _fallback.propagate}
if _kernels is not None:
    BACKENDS["cython"] = _kernels.propagate

BACKEND = "cython" if _kernels is not None else "python"
propagate = BACKENDS[BACKEND]


def use_backend(name: str) -> str:
    """Select ``"cython"`` or ``"python"``; returns the previously active name."""
    global BACKEND, propagate
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable (have {sorted(BACKENDS)})")
    previous = BACKEND
    BACKEND, propagate = name, BACKENDS[name]
    return previous
