"""Command-line front end.

    pseudoh verify ALGEBRA [--samples N] [--seed S] [--json]
    pseudoh conjugate {analytic,numeric} --algebra A --z0 .. --x0 .. [--window a,b] [--out csv|json]
    pseudoh crosscheck --algebra A --z0 .. --x0 .. [--window a,b] [--t-tol T]
    pseudoh scan --algebra A --z0 .. --x0 .. --param {a,b} --range lo,hi,n
    pseudoh export ALGEBRA

``ALGEBRA`` is ``catalog:NAME`` or a path to an algebra JSON file.  Vectors are
comma-separated coordinates in the algebra's basis order; a bare ``0`` means
the zero vector.  Exit status: 0 success, 1 crosscheck mismatch, 2 usage
error, 3 validation failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, catalog
from .algebra import (
    MetricNilpotentAlgebra,
    causal_class,
    is_pseudo_h_type,
    is_pseudoregular,
)
from .analytic import (
    GeodesicInvariants,
    SolverConfig,
    analytic_conjugate_points,
    default_window,
    geodesic_invariants,
)
from .errors import IntegratorFailure, PseudoHError
from .geometry import make_ic
from .identities import run_suites
from .numeric import IntegratorConfig, cross_validate, detect_conjugate_points, numeric_default_window
from .report import RunReport, dump_algebra, ic_record, load_algebra, point_record, points_csv

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_INVALID = 3

CLAIM_TOL = 1e-12


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _window(text: str) -> tuple[float, float]:
    vals = _floats(text)
    if len(vals) != 2 or not vals[0] < vals[1]:
        raise argparse.ArgumentTypeError(f"window must be 'lo,hi' with lo < hi, got {text!r}")
    return vals[0], vals[1]


def _sweep(text: str) -> tuple[float, float, int]:
    parts = text.split(",")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError):
        raise argparse.ArgumentTypeError(f"range must be 'lo,hi,n', got {text!r}") from None
    if len(parts) != 3 or n < 1 or not lo <= hi:
        raise argparse.ArgumentTypeError(f"range must be 'lo,hi,n' with lo <= hi and n >= 1, got {text!r}")
    return lo, hi, n


def _default_seed() -> int:
    raw = os.environ.get("PSEUDOH_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"PSEUDOH_SEED must be an integer, got {raw!r}") from None


def _coords(values: list[float], size: int, what: str) -> np.ndarray:
    if values == [0.0]:
        return np.zeros(size)
    if len(values) != size:
        raise UsageError(f"{what} needs {size} coordinates, got {len(values)}")
    return np.array(values)


def _load(source: str) -> MetricNilpotentAlgebra:
    try:
        return load_algebra(source)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    except OSError as exc:
        raise UsageError(f"cannot read {source}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise PseudoHError(f"{source} is not valid JSON: {exc}") from None


def _emit(text: str, output: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _setup(args):
    alg = _load(args.algebra)
    ic = make_ic(
        alg,
        _coords(args.z0, alg.dim_center, "--z0"),
        _coords(args.x0, alg.dim_v, "--x0"),
    )
    return alg, ic


def _require_pseudo_h(alg: MetricNilpotentAlgebra) -> None:
    if not is_pseudo_h_type(alg):
        raise PseudoHError(f"{alg.name} is not of pseudo-H type; the closed-form loci do not apply")


def _integrator_config(args) -> IntegratorConfig:
    try:
        return IntegratorConfig(
            method=args.method,
            rel_tol=args.rel_tol,
            abs_tol=args.abs_tol,
            rank_tol=args.rank_tol,
            bisect_tol=args.bisect_tol,
            scan_points_per_period=args.scan,
            max_steps=args.max_steps,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _numeric_window(window, inv):
    lo, hi = window if window is not None else numeric_default_window(inv)
    if lo < 0:
        raise UsageError("numeric windows must start at t >= 0")
    return lo, hi


# --- subcommands --------------------------------------------------------------


def cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    alg = _load(args.algebra)
    rng = np.random.default_rng(seed)
    rows: list[dict] = [{"check": "validate", "value": f"p={alg.dim_center} q={alg.dim_v}", "passed": True}]
    for label, check in catalog.claims(alg):
        err = check(alg, rng, args.samples)
        rows.append({"check": label, "value": err, "passed": err < CLAIM_TOL})
    rows.append({"check": "pseudo-H type", "value": is_pseudo_h_type(alg), "passed": None})
    reg = is_pseudoregular(alg, rng_seed=seed)
    value = reg.verdict.value
    if reg.witness is not None:
        value += f" (witness {catalog.describe(alg, reg.witness)}: {reg.failed_condition})"
    rows.append({"check": "pseudoregular", "value": value, "passed": None})
    for res in run_suites(alg, samples=args.samples, seed=seed):
        rows.append({
            "check": res.name,
            "value": f"skipped ({res.skipped})" if res.skipped else res.max_error,
            "passed": None if res.skipped else res.passed,
        })

    if args.json:
        report = RunReport(
            "verify", alg.name, None, {"samples": args.samples, "seed": seed, "claim_tol": CLAIM_TOL}, rows
        )
        _emit(report.to_json(), args.output)
    else:
        width = max(len(r["check"]) for r in rows)
        lines = [f"algebra: {alg.name}"]
        for r in rows:
            v = r["value"]
            if isinstance(v, bool):
                v = str(v).lower()
            elif isinstance(v, float):
                v = f"max error {v:.3e}"
            mark = "" if r["passed"] is None else ("  ok" if r["passed"] else "  FAIL")
            lines.append(f"  {r['check']:<{width}}  {v}{mark}")
        _emit("\n".join(lines), args.output)
    return EXIT_OK


def _run_analytic(alg, ic, window):
    _require_pseudo_h(alg)
    inv = geodesic_invariants(alg, ic)
    window = window if window is not None else default_window(inv)
    return inv, window, analytic_conjugate_points(inv, window, SolverConfig())


def cmd_conjugate(args) -> int:
    alg, ic = _setup(args)
    if args.mode == "analytic":
        inv, window, points = _run_analytic(alg, ic, args.window)
        config = {"window": list(window), "solver": dataclasses.asdict(SolverConfig())}
    else:
        inv = geodesic_invariants(alg, ic)
        window = _numeric_window(args.window, inv)
        cfg = _integrator_config(args)
        points = detect_conjugate_points(alg, ic, window, cfg)
        config = {"window": list(window), "integrator": dataclasses.asdict(cfg)}
    config["causal_class"] = causal_class(alg, ic.velocity).value
    if args.out == "csv":
        _emit(points_csv(points), args.output)
    else:
        report = RunReport(
            f"conjugate {args.mode}", alg.name, ic_record(ic), config, [point_record(p) for p in points]
        )
        _emit(report.to_json(), args.output)
    return EXIT_OK


def cmd_crosscheck(args) -> int:
    alg, ic = _setup(args)
    _require_pseudo_h(alg)
    window = _numeric_window(args.window, geodesic_invariants(alg, ic))
    cfg = _integrator_config(args)
    _, _, analytic = _run_analytic(alg, ic, window)
    numeric = detect_conjugate_points(alg, ic, window, cfg)
    xv = cross_validate(analytic, numeric, t_tol=args.t_tol)
    config = {
        "window": list(window),
        "t_tol": args.t_tol,
        "solver": dataclasses.asdict(SolverConfig()),
        "integrator": dataclasses.asdict(cfg),
    }
    mismatches = [r for r in xv.rows() if r["status"] != "matched" or not r["mult_agree"]]
    report = RunReport("crosscheck", alg.name, ic_record(ic), config, xv.rows(), mismatches)
    _emit(report.to_json(), args.output)
    print(
        f"{len(xv.matched)} matched, {len(xv.analytic_only)} analytic-only, "
        f"{len(xv.numeric_only)} numeric-only, {len(xv.multiplicity_mismatches)} multiplicity mismatches",
        file=sys.stderr,
    )
    return xv.exit_status


def cmd_scan(args) -> int:
    alg, ic = _setup(args)
    _require_pseudo_h(alg)
    base = geodesic_invariants(alg, ic)
    lo, hi, n = args.range
    rows = ["param,t0,multiplicity,branch"]
    for value in np.linspace(lo, hi, n).tolist():
        a, b = (value, base.b) if args.param == "a" else (base.a, value)
        # sweeping an invariant implies the corresponding component is present
        inv = GeodesicInvariants(
            a, b, a + b, base.p, base.q,
            z0_zero=base.z0_zero and args.param != "a",
            x0_zero=base.x0_zero and args.param != "b",
            null_tol=base.null_tol,
        )
        window = args.window if args.window is not None else default_window(inv)
        for cp in analytic_conjugate_points(inv, window, SolverConfig()):
            rows.append(f"{value:.17g},{cp.t0:.17g},{cp.multiplicity},{cp.branch.value}")
    _emit("\n".join(rows), args.output)
    return EXIT_OK


def cmd_export(args) -> int:
    _emit(dump_algebra(_load(args.algebra)), args.output)
    return EXIT_OK


# --- parser -------------------------------------------------------------------


def _add_ic(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algebra", required=True, help="catalog:NAME or algebra JSON path")
    p.add_argument("--z0", type=_floats, required=True, help="central coordinates, e.g. 1,1,0")
    p.add_argument("--x0", type=_floats, required=True, help="v coordinates, e.g. 1,0,0,0")
    p.add_argument("--window", type=_window, default=None, help="time window lo,hi")
    p.add_argument("--output", "-o", default=None, help="write to FILE instead of stdout")


def _add_integrator(p: argparse.ArgumentParser) -> None:
    d = IntegratorConfig()
    p.add_argument("--method", choices=("rk45", "rk4"), default=d.method)
    p.add_argument("--rel-tol", type=float, default=d.rel_tol)
    p.add_argument("--abs-tol", type=float, default=d.abs_tol)
    p.add_argument("--rank-tol", type=float, default=d.rank_tol)
    p.add_argument("--bisect-tol", type=float, default=d.bisect_tol)
    p.add_argument("--scan", type=int, default=d.scan_points_per_period, help="grid points per period")
    p.add_argument("--max-steps", type=int, default=d.max_steps, help="integrator step budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pseudoh", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="structure checks and identity suites")
    p.add_argument("algebra")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: $PSEUDOH_SEED or 0)")
    p.add_argument("--json", action="store_true", help="emit a JSON report instead of a table")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("conjugate", help="conjugate points along one geodesic")
    p.add_argument("mode", choices=("analytic", "numeric"))
    _add_ic(p)
    _add_integrator(p)
    p.add_argument("--out", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_conjugate)

    p = sub.add_parser("crosscheck", help="compare analytic and numeric conjugate points")
    _add_ic(p)
    _add_integrator(p)
    p.add_argument("--t-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_crosscheck)

    p = sub.add_parser("scan", help="sweep <z0,z0> or <x0,x0> and tabulate analytic conjugate points")
    _add_ic(p)
    p.add_argument("--param", choices=("a", "b"), required=True)
    p.add_argument("--range", type=_sweep, required=True, help="lo,hi,n")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("export", help="write an algebra as JSON")
    p.add_argument("algebra")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pseudoh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PseudoHError as exc:
        print(f"pseudoh: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except IntegratorFailure as exc:
        print(f"pseudoh: IntegratorFailure: {exc}; try a narrower --window", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
