"""Command-line front end.

Every command writes to stdout unless ``--output`` is given.  Floats are
printed with 17 significant digits so that outputs round-trip and repeated
runs are byte-identical.  Usage errors exit with status 2, failed numerical
contracts with status 1 and a JSON report.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import asymptotics, control, extensions, spectrum
from .errors import ShcError
from .special_functions import (
    bessel_j,
    bessel_zeros,
    product_upper_bound_check,
    wronskian_residual,
)

VERIFY_NUS = (0.1, 0.3, 0.5, 0.6, 0.9)


def thread_count() -> int:
    """Worker cap from SHC_THREADS (default: CPU count)."""
    raw = os.environ.get("SHC_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _fmt(v) -> str:
    return format(float(v), ".17g")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(args, text: str):
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_matrix(text: str):
    try:
        m = json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"not a JSON matrix: {exc}") from exc
    arr = np.asarray(m, dtype=float)
    if arr.shape != (2, 2):
        raise argparse.ArgumentTypeError("expected a 2x2 matrix")
    return arr


def _nu(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("nu must lie in (0, 1)")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


# commands


def cmd_spectrum(args) -> int:
    if args.figure:
        nus = args.nus or [args.nu]
        buf = io.StringIO()
        buf.write("nu,n,lambda,j2_nu,j2_minus_nu\n")
        for row in spectrum.figure_rows(nus, args.count):
            buf.write(",".join([_fmt(row[0]), str(row[1])] + [_fmt(v) for v in row[2:]]) + "\n")
        _write(args, buf.getvalue())
        return 0
    if args.asymptotics:
        _write(args, asymptotics.asymptotics_csv(args.nu, args.parity, args.count))
        return 0
    basis = spectrum.build_basis(args.nu, args.count)
    if args.format == "json":
        rows = [
            {
                "n": r.index,
                "parity": r.parity,
                "bracket_lo": r.bracket[0],
                "bracket_hi": r.bracket[1],
                "lambda": r.lam,
                "norm_a": r.norm_a,
            }
            for r in basis.records
        ]
        _write(args, _dump_json({"nu": basis.param.nu, "modes": rows}))
    else:
        _write(args, basis.to_csv())
    return 0


def cmd_eigfun(args) -> int:
    basis = spectrum.build_basis(args.nu, args.n + 1)
    if args.x:
        x = np.asarray(args.x, dtype=float)
    else:
        k = args.points
        x = np.concatenate([np.linspace(-1, -0.01, k), np.linspace(0.01, 1, k)])
    y = basis.phi(args.n, x)
    buf = io.StringIO()
    buf.write("x,phi\n")
    for a, b in zip(x, y):
        buf.write(f"{_fmt(a)},{_fmt(b)}\n")
    _write(args, buf.getvalue())
    return 0


def _check(name, nu, value, threshold, ok=None):
    if ok is None:
        ok = bool(value < threshold)
    return {"name": name, "nu": nu, "value": float(value), "threshold": threshold, "ok": bool(ok)}


def verify_nu(nu: float, count: int) -> list:
    """The invariant suite at one order."""
    out = []
    x = np.logspace(-2, 3, 200)
    out.append(_check("wronskian", nu, np.max(np.abs(wronskian_residual(nu, x)) * x), 1e-9))
    xs = np.linspace(0.05, 60, 400)
    out.append(_check("product_bound", nu, 0.0, 1.0, product_upper_bound_check(nu, xs)))
    zp, zm = bessel_zeros(nu, 50), bessel_zeros(-nu, 50)
    inter = bool(np.all(zm < zp) and np.all(zp[:-1] < zm[1:]))
    out.append(_check("interlacing", nu, 0.0, 1.0, inter))
    basis = spectrum.build_basis(nu, count)
    lam = basis.lambdas_ld
    out.append(_check("lambda0_zero", nu, abs(float(lam[0])), 1e-300, lam[0] == 0))
    out.append(_check("strict_order", nu, 0.0, 1.0, bool(np.all(np.diff(lam) > 0))))
    inside = True
    for r in basis.records[1:]:
        lo, hi = r.bracket
        if lo != hi:
            inside &= bool(np.longdouble(lo) < r.lam_ld < np.longdouble(hi))
    out.append(_check("bracketing", nu, 0.0, 1.0, inside))
    out.append(_check("characteristic_residual", nu, max(r.residual for r in basis.records), 1e-9))
    out.append(_check("coefficient_relations", nu, max(basis.coefficient_residuals(n) for n in range(count)), 1e-10))
    G = basis.gram_matrix(min(15, count))
    out.append(_check("orthonormality", nu, np.max(np.abs(G - np.eye(G.shape[0]))), 1e-6))
    I2 = extensions.classify_extension(np.eye(2), np.eye(2))
    tr = max(
        extensions.transmission_residual(I2, extensions.eigenfunction_alphabeta(basis, n)) for n in range(count)
    )
    out.append(_check("transmission", nu, tr, 1e-10))
    grid = np.concatenate([np.linspace(-0.9, -0.1, 9), np.linspace(0.1, 0.9, 9)])
    ode = max(basis.ode_residual(n, grid) for n in range(min(15, count)))
    out.append(_check("ode_residual", nu, ode, 1e-4))
    return out


def cmd_verify(args) -> int:
    nus = args.nus or list(VERIFY_NUS)
    with ThreadPoolExecutor(max_workers=min(thread_count(), len(nus))) as ex:
        results = list(ex.map(lambda v: verify_nu(v, args.count), nus))
    checks = [c for part in results for c in part]
    ok = all(c["ok"] for c in checks)
    _write(args, _dump_json({"ok": ok, "count": args.count, "checks": checks}))
    return 0 if ok else 1


def cmd_control(args) -> int:
    with open(args.problem, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        nu = float(data["nu"])
        problem = control.ControlProblem.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad problem file: {exc}") from exc
    cert = control.certificate(nu, problem, args.horizon)
    _write(args, _dump_json(cert))
    return 0 if cert["ok"] else 1


def cmd_extensions(args) -> int:
    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            d = json.load(fh)
        m2, m3 = _json_matrix(json.dumps(d["M2"])), _json_matrix(json.dumps(d["M3"]))
    else:
        m2 = args.m2 if args.m2 is not None else np.eye(2)
        m3 = args.m3 if args.m3 is not None else np.eye(2)
    spec = extensions.classify_extension(m2, m3)
    _write(args, json.dumps(spec.to_dict(), sort_keys=True) + "\n")
    return 0


def cmd_illposed(args) -> int:
    eps_list = args.eps or [1.0]
    rows = []
    for eps in eps_list:
        p = extensions.illposedness_profile(args.c, eps)
        rows.append(
            {
                "c": p.c,
                "eps": p.eps,
                "int_f2": p.int_f2,
                "int_f2_over_x2": p.int_f2_over_x2,
                "int_fprime2": p.int_fprime2,
                "form_value": p.form_value,
                "form_value_times_eps": p.form_value * p.eps,
                "rayleigh_quotient": p.rayleigh_quotient,
                "quadrature": list(p.quadrature),
                "quadrature_rel_error": p.quadrature_error,
            }
        )
    report = {"leading_blowup": extensions.leading_blowup(args.c), "profiles": rows}
    _write(args, _dump_json(report))
    bad = [r for r in rows if not r["quadrature_rel_error"] <= 1e-9]
    return 1 if bad else 0


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shc", description="Inverse-square heat operator toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", "-o", help="write to this file instead of stdout")

    s = sub.add_parser("spectrum", help="eigenvalues, figure data or asymptotic residuals")
    s.add_argument("--nu", type=_nu, default=0.5)
    s.add_argument("--count", type=_positive_int, default=10)
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.add_argument("--figure", action="store_true", help="emit (nu, n, lambda, j_nu^2, j_-nu^2) rows")
    s.add_argument("--nus", type=_nu, nargs="+", help="orders for --figure")
    s.add_argument("--asymptotics", action="store_true", help="emit (n, computed, predicted, residual)")
    s.add_argument("--parity", choices=["even", "odd"], default="even")
    common(s)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("eigfun", help="sample a normalised eigenfunction")
    s.add_argument("--nu", type=_nu, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--points", type=_positive_int, default=50)
    s.add_argument("--x", type=float, nargs="+")
    common(s)
    s.set_defaults(func=cmd_eigfun)

    s = sub.add_parser("verify", help="run the invariant suite")
    s.add_argument("--nus", type=_nu, nargs="+")
    s.add_argument("--count", type=_positive_int, default=201)
    common(s)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("control", help="synthesize a control from a JSON problem file")
    s.add_argument("--problem", required=True)
    s.add_argument("--horizon", type=_positive_int, help="report modes below this index")
    common(s)
    s.set_defaults(func=cmd_control)

    s = sub.add_parser("extensions", help="self-adjoint extension tools")
    esub = s.add_subparsers(dest="action", required=True)
    c = esub.add_parser("classify", help="classify a pair (M2, M3)")
    c.add_argument("--m2", type=_json_matrix)
    c.add_argument("--m3", type=_json_matrix)
    c.add_argument("--input", help='JSON file {"M2": [[..]], "M3": [[..]]}')
    common(c)
    c.set_defaults(func=cmd_extensions)

    s = sub.add_parser("illposed", help="blow-up integrals for c < -1/4")
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--eps", type=float, nargs="+")
    common(s)
    s.set_defaults(func=cmd_illposed)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        parser.error(str(exc))
    except ShcError as exc:
        report = {"ok": False, "error": type(exc).__name__, "message": str(exc)}
        sys.stdout.write(_dump_json(report))
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
