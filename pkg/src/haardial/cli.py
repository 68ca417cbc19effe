"""Command-line interface.

Exit codes: 0 success, 1 I/O failure, 2 usage or validation error,
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .circuit import CircuitSpec, Convention, Scheme, build_unitary
from .errors import HaarDialError
from .linalg import matrix_to_json

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_FAIL = 0, 1, 2, 3

# Negative-control hook for the verify command: a known-biased generator.
BIAS_ENV = "HAAR_DIAL_INJECT_BIAS"


class UsageError(Exception):
    pass


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _float_list(text: str) -> list:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _seed(args) -> int:
    from .sampler import resolve_seed

    try:
        return resolve_seed(args.seed)
    except ValueError:
        raise UsageError("HAAR_DIAL_SEED is not an integer") from None


def cmd_sample(args) -> int:
    from .sampler import sample_circuit

    if args.modes < 1:
        raise UsageError("--modes must be >= 1")
    if args.emit_matrix and not args.matrix_out:
        raise UsageError("--emit-matrix needs --matrix-out")
    seed = _seed(args)
    specs = [sample_circuit(args.modes, args.scheme, args.convention, seed, index=k)
             for k in range(args.count)]
    _write(args.out, "".join(s.to_json() + "\n" for s in specs))
    if args.emit_matrix:
        _write(args.matrix_out, "".join(matrix_to_json(build_unitary(s)) + "\n" for s in specs))
    return EXIT_OK


def _zero_phase_hook(values, phis, terminal):
    return values, np.zeros_like(phis), np.zeros_like(terminal)


def cmd_verify(args) -> int:
    from .verify import run_battery

    if args.samples < 1000:
        raise UsageError("--samples must be >= 1000")
    if args.modes < 2:
        raise UsageError("--modes must be >= 2")
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    for s in schemes:
        Scheme(s)
    hook = None
    bias = os.environ.get(BIAS_ENV, "")
    if bias == "zero-phases":
        hook = _zero_phase_hook
    elif bias:
        raise UsageError(f"unknown {BIAS_ENV} value {bias!r}")
    seed = _seed(args)
    report = run_battery(args.modes, args.samples, seed, schemes, args.convention,
                         jobs=args.jobs, param_hook=hook)
    d = report.to_dict()
    d["seed"] = seed
    if args.report:
        _write(args.report, json.dumps(d, indent=2) + "\n")
    _write("-", report.to_text() + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_coverage(args) -> int:
    from .coverage import coverage_csv

    seed = _seed(args)
    text = coverage_csv(args.m_max, args.sigmas, args.trials, args.error_mode, seed, args.jobs)
    _write(args.out, text)
    return EXIT_OK


def cmd_compile_qubits(args) -> int:
    from .qubits import compile_circuit, equal_up_to_global_phase, gates_to_unitary

    spec = CircuitSpec.from_json(_read(args.input).strip().splitlines()[0])
    m = spec.modes
    if m < 2 or m & (m - 1):
        raise UsageError(f"compile-qubits needs a power-of-two mode count, got {m}")
    if not spec.convention.is_mzi:
        raise UsageError("compile-qubits needs an MZI convention")
    gl = compile_circuit(spec)
    _write(args.out, gl.to_json() + "\n")
    if args.check:
        ok = equal_up_to_global_phase(gates_to_unitary(gl), build_unitary(spec), 1e-10)
        sys.stderr.write("check: " + ("pass" if ok else "FAIL") + "\n")
        return EXIT_OK if ok else EXIT_FAIL
    return EXIT_OK


def cmd_jacobian_check(args) -> int:
    from .verify import (
        abs_det,
        hessenberg_reduction_check,
        jacobian_analytic,
        jacobian_closed_form,
        jacobian_relative_error,
        random_jacobian_point,
    )

    if args.dim_max < 2:
        raise UsageError("--dim-max must be >= 2")
    seed = _seed(args)
    rows, ok = [], True
    for n in range(2, args.dim_max + 1):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(n,)))
        errs, exact, red = [], [], 0
        for _ in range(args.points):
            p = random_jacobian_point(n, rng)
            errs.append(jacobian_relative_error(p))
            closed = jacobian_closed_form(p)
            exact.append(abs(abs_det(jacobian_analytic(p.r)) - closed) / closed)
            red += int(hessenberg_reduction_check(p))
        # finite differences against the closed form, plus the exact element
        # formulas against it (free of differencing roundoff)
        row = {"n": n, "points": args.points, "max_relative_error": float(max(errs)),
               "max_relative_error_analytic": float(max(exact)), "reduction_passed": red}
        row["passed"] = bool(row["max_relative_error"] < 1e-5 and red == args.points)
        ok &= row["passed"]
        rows.append(row)
    report = {"seed": seed, "passed": ok, "dims": rows}
    if args.report:
        _write(args.report, json.dumps(report, indent=2) + "\n")
    lines = [f"{'n':>3}  {'max rel err':>12}  reductions  result"]
    for r in rows:
        lines.append(f"{r['n']:>3}  {r['max_relative_error']:>12.3e}  "
                     f"{r['reduction_passed']:>4}/{r['points']:<5}  {'pass' if r['passed'] else 'FAIL'}")
    lines.append("overall: " + ("pass" if ok else "FAIL"))
    _write("-", "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="haardial",
                                 description="Haar-random unitaries from randomly set mesh parameters.")
    sub = ap.add_subparsers(dest="command", required=True)
    schemes = [s.value for s in Scheme]
    conventions = [c.value for c in Convention]
    seed_help = "integer seed (default: $HAAR_DIAL_SEED, else random)"

    p = sub.add_parser("sample", help="draw random circuits")
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--scheme", choices=schemes, default="triangular-adjacent")
    p.add_argument("--convention", choices=conventions, default="reflectivity")
    p.add_argument("--seed", type=lambda s: int(s, 0), help=seed_help)
    p.add_argument("--count", type=_positive, default=1)
    p.add_argument("--out", default="-", help="JSON-lines output path ('-' for stdout)")
    p.add_argument("--emit-matrix", action="store_true", help="also write each unitary")
    p.add_argument("--matrix-out", help="JSON-lines path for the unitaries")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="run the Haar certification battery")
    p.add_argument("--modes", type=int, default=4)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--schemes", default=",".join(schemes))
    p.add_argument("--convention", choices=conventions, default="reflectivity")
    p.add_argument("--seed", type=lambda s: int(s, 0), help=seed_help)
    p.add_argument("--report", help="JSON report path")
    p.add_argument("--jobs", type=_positive, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("coverage", help="coverage curves as CSV")
    p.add_argument("--m-max", type=int, default=100)
    p.add_argument("--sigmas", type=_float_list, default=[1e-4, 5e-4, 1e-3, 2e-3])
    p.add_argument("--trials", type=_positive, default=1000)
    p.add_argument("--error-mode", choices=["per-component", "shared"], default="per-component")
    p.add_argument("--seed", type=lambda s: int(s, 0), help=seed_help)
    p.add_argument("--out", default="-")
    p.add_argument("--jobs", type=_positive, default=1)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("compile-qubits", help="compile a 2^p-mode circuit to qubit gates")
    p.add_argument("--in", dest="input", required=True, help="circuit JSON (first line is used)")
    p.add_argument("--out", default="-")
    p.add_argument("--check", action="store_true", help="verify the round trip")
    p.set_defaults(func=cmd_compile_qubits)

    p = sub.add_parser("jacobian-check", help="verify the Jacobian determinant identities")
    p.add_argument("--dim-max", type=int, default=8)
    p.add_argument("--points", type=_positive, default=100)
    p.add_argument("--seed", type=lambda s: int(s, 0), help=seed_help)
    p.add_argument("--report", help="JSON report path")
    p.set_defaults(func=cmd_jacobian_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO
    except (HaarDialError, ValueError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
