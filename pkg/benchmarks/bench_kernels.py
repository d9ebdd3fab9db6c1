"""Compare the compiled and numpy Jacobi-flow propagators.

    python benchmarks/bench_kernels.py [--repeat 3]

Times one full endpoint-matrix propagation over two periods (or the oracle's
default window, if shorter) for a few catalog algebras, with each backend,
and reports the speedup.
"""
import argparse
import math
import time

import numpy as np

from pseudoh import IntegratorConfig, catalog, geodesic_invariants, kernels, make_ic
from pseudoh.numeric import JacobiFlow, numeric_default_window

CASES = [
    ("heisenberg1", [1.0], [1.0, 0.0]),
    ("heisenberg2", [1.0], [1.0, 0.0, 0.5, 0.0]),
    ("example1-k1", [0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0]),
    ("example1-k3", [1.0, 0.3, 0.0], list(np.linspace(0.1, 1.2, 12))),
]


def bench(name, z0, x0, method, repeat):
    alg = catalog.by_name(name)
    ic = make_ic(alg, z0, x0)
    flow = JacobiFlow(alg, ic, IntegratorConfig(method=method))
    t_end = min(2 * flow.period, numeric_default_window(geodesic_invariants(alg, ic))[1])
    times = np.linspace(0.0, t_end, 129)[1:]
    state = flow.initial_state()
    out = {}
    for backend in kernels.BACKENDS:
        kernels.use_backend(backend)
        best = math.inf
        for _ in range(repeat):
            t = time.perf_counter()
            res = flow.propagate(0.0, state, times)
            best = min(best, time.perf_counter() - t)
        out[backend] = (best, res)
    return alg.dim, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--method", choices=("rk45", "rk4"), default="rk45")
    args = parser.parse_args()

    if "cython" not in kernels.BACKENDS:
        print("compiled extension not built; only the python backend is available")
    previous = kernels.BACKEND
    print(f"{'algebra':<14}{'dim':>5}{'python s':>12}{'cython s':>12}{'speedup':>10}{'rel diff':>12}")
    try:
        for name, z0, x0 in CASES:
            dim, out = bench(name, z0, x0, args.method, args.repeat)
            py = out["python"][0]
            if "cython" in out:
                cy = out["cython"][0]
                ref = out["python"][1]
                diff = np.abs(ref - out["cython"][1]).max() / np.abs(ref).max()
                print(f"{name:<14}{dim:>5}{py:>12.4f}{cy:>12.4f}{py / cy:>9.1f}x{diff:>12.1e}")
            else:
                print(f"{name:<14}{dim:>5}{py:>12.4f}{'-':>12}{'-':>10}{'-':>12}")
    finally:
        kernels.use_backend(previous)


if __name__ == "__main__":
    main()
