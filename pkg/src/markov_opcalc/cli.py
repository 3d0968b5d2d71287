"""Command-line front end: ``markov-opcalc <subcommand> ...``.

Every subcommand prints (or writes to ``--out``) one JSON report carrying the
tool version, seed, quadrature settings and certificates used.  Exit status is
0 when every asserted check holds, 1 on a numerical defect (a bound or
agreement check that fails), and 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import fixtures as fx
from . import suites
from ._version import __version__
from .contours import ContourSpec
from .errors import (CertificateMismatchError, DomainError, NotInClassError, OpCalcError,
                     PreconditionError, RadiusError)
from .frechet import fd_order_check, frechet_derivative, taylor_eval
from .funcalc import apply, oracle_contour, oracle_eig
from .matrixcore import IdealNorm, matrix_to_dict, opnorm
from .measure import inverse_moment, total_mass
from .opclass import certify_V0b, certify_Vab, ritt_inverse_plus_identity, ritt_operator
from .perturb import (BOUND_IDS, bound_thm1, bound_thm2_pointwise, bound_thm3_ideal,
                      commutator_bound, moment_inequalities, min_inequality)
from .shift import trace_formula_check
from .symbols import MarkovSymbol, atom_symbol, check_membership, example1a, example1b

AGREE_RTOL = 1e-8


class UsageError(Exception):
    pass


# -- input parsing -------------------------------------------------------------

def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path}: {exc}") from None


def parse_symbol(text: str) -> MarkovSymbol:
    """A JSON file, or a shorthand ``example1a:alpha,b``, ``example1b:alpha,b``,
    ``atoms:t1,w1;t2,w2[@a,b]``."""
    if text is None:
        raise UsageError("--symbol is required")
    if Path(text).suffix == ".json" or Path(text).exists():
        try:
            return MarkovSymbol.from_dict(_read_json(text))
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"invalid symbol literal: {exc}") from None
    name, _, rest = text.partition(":")
    try:
        if name in ("example1a", "example1b"):
            vals = [float(v) for v in rest.split(",")] if rest else [0.5, 1.0]
            alpha, b = (vals + [1.0])[:2]
            return (example1a if name == "example1a" else example1b)(alpha, b)
        if name == "atoms":
            body, _, iv = rest.partition("@")
            atoms = [tuple(float(v) for v in part.split(",")) for part in body.split(";") if part]
            if iv:
                a, b = (float(v) for v in iv.split(","))
                return atom_symbol(atoms, a, b)
            return atom_symbol(atoms)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid symbol {text!r}: {exc}") from None
    raise UsageError(f"unknown symbol {text!r}")


def parse_matrix(path: str, key=None) -> np.ndarray:
    if path is None:
        raise UsageError("a matrix argument is required")
    if path.lower().endswith(".csv"):
        from .matrixcore import load_matrix
        try:
            return load_matrix(path)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        return fx.matrix_from_document(_read_json(path), key)
    except ValueError as exc:
        raise UsageError(f"invalid matrix in {path}: {exc}") from None


def parse_pair(text: str, name: str):
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError:
        parts = []
    if len(parts) != 2:
        raise UsageError(f"{name} must be 'x,y'")
    return parts


def parse_ideal(text: str) -> IdealNorm:
    try:
        return IdealNorm.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- reporting -------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def envelope(command: str, args, ok: bool, result: dict, certificates=(), orders=None) -> dict:
    return {
        "tool": "markov-opcalc",
        "version": __version__,
        "command": command,
        "seed": getattr(args, "seed", None),
        "orders": orders or {},
        "certificates": [c.to_dict() for c in certificates],
        "ok": bool(ok),
        "result": result,
    }


def emit(report: dict, out: str | None):
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cert_for(f: MarkovSymbol, A, interval=None):
    a, b = interval if interval is not None else f.interval
    if a == 0.0:
        return certify_V0b(A, b)
    return certify_Vab(A, a, b)


def _orders(f: MarkovSymbol, used=None):
    d = {"measure_default": f.measure.order if f.measure is not None else None,
         "adaptive_rtol": 1e-10}
    if used is not None:
        d["used"] = used
    return d


# -- subcommands -------------------------------------------------------------------

def cmd_certify(args):
    A = parse_matrix(args.matrix)
    a, b = parse_pair(args.interval or "0,1", "--interval")
    cert = certify_V0b(A, b) if a == 0.0 and args.kind != "Vab" else certify_Vab(A, a, b)
    return envelope("certify", args, True, {"certificate": cert.to_dict()}, [cert])


def cmd_apply(args):
    f = parse_symbol(args.symbol)
    A = parse_matrix(args.matrix)
    interval = parse_pair(args.interval, "--interval") if args.interval else None
    cert = _cert_for(f, A, interval)
    F, res = apply(f, A, cert, info=True, order=args.order)
    nF = opnorm(F)
    tol = (args.tolerance or AGREE_RTOL) * (1.0 + nF)
    checks = {}
    if args.oracle in ("eig", "both"):
        try:
            checks["eig"] = float(opnorm(F - oracle_eig(f, A)))
        except OpCalcError as exc:
            checks["eig"] = f"refused: {exc}"
    if args.oracle in ("contour", "both"):
        checks["contour"] = float(opnorm(F - oracle_contour(f, A)))
    ok = all(v <= tol for v in checks.values() if isinstance(v, float))
    mass = total_mass(f.measure)
    result = {"matrix": matrix_to_dict(F), "norm": nF, "oracle_differences": checks,
              "tolerance": tol, "norm_bound": (1.0 + cert.M_A) * mass if cert.kind == "V0b" else None}
    return envelope("apply", args, ok, result, [cert],
                    _orders(f, res.order if res is not None else None))


def cmd_perturb(args):
    if args.suite:
        trials = args.trials
        out, ok = {}, True
        bounds = [args.bound] if args.bound else list(suites.SUITE_BOUNDS)
        for k, bid in enumerate(bounds):
            reps = suites.run_bound_suite(bid, trials, args.seed + k)
            fails = [r.to_dict() for r in reps if not r.holds]
            out[bid] = {"trials": len(reps), "violations": len(fails),
                        "min_slack": min(r.slack for r in reps), "failures": fails}
            ok = ok and not fails
        return envelope("perturb", args, ok, {"suite": out})
    f = parse_symbol(args.symbol)
    bid = args.bound or "thm1"
    if bid not in BOUND_IDS:
        raise UsageError(f"--bound must be one of {', '.join(BOUND_IDS)}")
    A = parse_matrix(args.A or args.matrix, "A")
    which = parse_ideal(args.ideal)
    cA = certify_V0b(A, f.interval[1])
    certs = [cA]
    rng = np.random.default_rng(args.seed)
    if bid in ("thm1", "thm2", "thm3"):
        B = parse_matrix(args.B, "B")
        cB = certify_V0b(B, f.interval[1])
        certs.append(cB)
        if bid == "thm1":
            rep = bound_thm1(f, A, B, cA, cB)
        elif bid == "thm3":
            rep = bound_thm3_ideal(f, A, B, which, cA, cB)
        else:
            x = fx.random_vector(A.shape[0], rng)
            rep = bound_thm2_pointwise(f, A, B, x, cA, cB)
        reports = [rep]
    elif bid in ("cor1", "cor2"):
        x = fx.random_vector(A.shape[0], rng)
        reports = list(moment_inequalities(f, A, x, cA))
    else:
        U = parse_matrix(args.U, "U") if args.U else fx.random_unitary(A.shape[0], rng)
        reports = [commutator_bound(f, A, U, which, cA)]
    ok = all(r.holds for r in reports)
    return envelope("perturb", args, ok, {"reports": [r.to_dict() for r in reports]}, certs,
                    _orders(f))


def cmd_frechet(args):
    f = parse_symbol(args.symbol)
    A = parse_matrix(args.matrix or args.A, "A")
    B = parse_matrix(args.direction or args.B, "B")
    cert = _cert_for(f, A)
    D = frechet_derivative(f, A, B, cert)
    result = {"derivative": matrix_to_dict(D), "norm": opnorm(D)}
    ok = True
    if args.fd_check:
        chk = fd_order_check(f, A, B, order=args.order)
        result["fd_check"] = chk.to_dict()
        ok = chk.slope >= 1.9
    return envelope("frechet", args, ok, result, [cert], _orders(f))


def cmd_taylor(args):
    f = parse_symbol(args.symbol)
    A = parse_matrix(args.matrix or args.A, "A")
    B = parse_matrix(args.direction or args.B, "B")
    zr, zi = parse_pair(args.z, "--z")
    z = complex(zr, zi)
    cert = certify_Vab(A, *f.interval)
    res = taylor_eval(f, A, B, z, args.terms, cert)
    direct = apply(f, A + z * B) - apply(f, A)
    err = opnorm(res.value - direct)
    tol = (args.tolerance or AGREE_RTOL) * (1.0 + opnorm(direct))
    result = res.to_dict()
    result.update(value=matrix_to_dict(res.value), direct_difference=err, tolerance=tol)
    ok = err <= max(tol, res.truncation_bound * 1.01)
    return envelope("taylor", args, ok, result, [cert], _orders(f))


def cmd_trace_shift(args):
    f = parse_symbol(args.symbol)
    A = parse_matrix(args.A or args.matrix, "A")
    B = parse_matrix(args.B, "B")
    contour = None
    if args.contour:
        try:
            contour = ContourSpec.parse(args.contour)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    rep = trace_formula_check(f, A, B, contour, tolerance=args.tolerance or 1e-7)
    a, b = f.interval
    certs = [certify_Vab(A, a, b), certify_Vab(B, a, b)]
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["re_z", "im_z", "re_xi", "im_xi"])
        for row in rep.xi.to_rows():
            w.writerow([repr(v) for v in row])
        Path(args.csv).write_text(buf.getvalue())
    ok = (rep.agree and rep.cauchy_max_error <= 1e-7 and rep.anchor_shift_delta <= 1e-9
          and rep.bilinear_ratio <= 1.0 + 1e-10)
    return envelope("trace-shift", args, ok, rep.to_dict(), certs,
                    {**_orders(f), "contour_nodes": rep.nodes})


def cmd_fixtures(args):
    params = {}
    if args.params:
        try:
            params = json.loads(args.params)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--params is not valid JSON: {exc}") from None
        if not isinstance(params, dict):
            raise UsageError("--params must be a JSON object")
    try:
        doc = fx.make_fixture(args.kind, params, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return doc


def selftest(seed: int, trials: int = 10) -> list:
    """Compact run of every module check; returns ``(name, ok, detail)`` rows."""
    rng = np.random.default_rng(seed)
    rows = []

    def add(name, ok, detail=None):
        rows.append({"check": name, "ok": bool(ok), "detail": detail})

    for alpha in (0.25, 0.5, 0.75):
        f = example1a(alpha, 1.0)
        im = inverse_moment(f.measure)
        add(f"inverse_moment alpha={alpha}", abs(im - 1.0) <= 1e-10, im)
        add(f"mass alpha={alpha}", abs(total_mass(f.measure) - alpha) <= 1e-10)
    add("membership example1a", check_membership(example1a(0.5, 1.0)).passed)
    add("membership example1b not ZR(0,b]",
        not check_membership(example1b(0.5, 1.0), as_class="ZR_0b").passed)
    c = certify_V0b(np.diag([3.0]), 1.0)
    add("ritt diag(1/2) M_A", abs(c.M_A - 0.5) <= 1e-5, c.M_A)
    T = ritt_operator(4, rng)
    add("ritt fixture certified", certify_V0b(ritt_inverse_plus_identity(T), 1.0).M_A > 0)
    J = fx.jordan(-1.0, 2)
    FJ = apply(atom_symbol([(1.0, 1.0)]), J)
    add("jordan apply", np.allclose(FJ, [[-0.5, 0.25], [0, -0.5]], atol=1e-12))
    for k in range(3):
        A = suites.oracle_fixture(int(rng.integers(2, 6)), rng, normal=k % 2 == 0)
        for f in suites.builtin_symbols():
            F = apply(f, A)
            tol = AGREE_RTOL * (1 + opnorm(F))
            d1 = opnorm(F - oracle_eig(f, A))
            d2 = opnorm(F - oracle_contour(f, A))
            add(f"oracle triangle {f.name} #{k}", max(d1, d2) <= tol, [d1, d2])
    for k, bid in enumerate(suites.SUITE_BOUNDS):
        reps = suites.run_bound_suite(bid, trials, seed + 100 + k)
        add(f"suite {bid}", all(r.holds for r in reps), min(r.slack for r in reps))
    lhs_ok = all(l <= r * (1 + 1e-12) for l, r in
                 (min_inequality(*rng.uniform(0.01, 10, 3)) for _ in range(100)))
    add("min inequality", lhs_ok)
    A = suites.oracle_fixture(4, rng)
    B = rng.standard_normal((4, 4))
    chk = fd_order_check(example1a(0.5, 1.0), A, B)
    add("frechet fd slope", chk.slope >= 1.9, chk.slope)
    fab = atom_symbol([(1.5, 1.0)], 1.0, 2.0)
    rep = trace_formula_check(fab, np.diag([-1.0, -3.0]), np.diag([-2.0, -3.0]))
    add("trace formula diag", rep.agree, [rep.direct, rep.kernel, rep.contour])
    A1, B1 = np.array([[-1.0]]), np.array([[-2.0]])
    rep = trace_formula_check(example1b(0.5, 1.0), A1, B1)
    add("trace formula 1x1", abs(rep.contour - rep.direct) <= 1e-10, abs(rep.contour - rep.direct))
    cert = certify_Vab(A, 0.0, 1.0)
    Bt = B / opnorm(B)
    z = 0.5 * cert.delta_A
    res = taylor_eval(example1a(0.5, 1.0), A, Bt, z, 40, cert)
    direct = apply(example1a(0.5, 1.0), A + z * Bt) - apply(example1a(0.5, 1.0), A)
    add("taylor series", opnorm(res.value - direct) <= 1e-8 * (1 + opnorm(direct)))
    return rows


def cmd_selftest(args):
    rows = selftest(args.seed, args.trials)
    return envelope("selftest", args, all(r["ok"] for r in rows), {"checks": rows})


COMMANDS = {
    "certify": cmd_certify,
    "apply": cmd_apply,
    "perturb": cmd_perturb,
    "frechet": cmd_frechet,
    "taylor": cmd_taylor,
    "trace-shift": cmd_trace_shift,
    "selftest": cmd_selftest,
    "fixtures": cmd_fixtures,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="markov-opcalc",
                                description="Operator calculus for Markov-type symbols.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, symbol=True):
        if symbol:
            sp.add_argument("--symbol", help="JSON file or example1a:alpha,b | example1b:alpha,b "
                                              "| atoms:t,w;t,w[@a,b]")
        sp.add_argument("--matrix", help="matrix JSON (or fixture document) or real CSV")
        sp.add_argument("--A", dest="A")
        sp.add_argument("--B", dest="B")
        sp.add_argument("--interval", help="a,b")
        sp.add_argument("--ideal", default="op", help="op | trace | hs | schatten:p")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out")
        sp.add_argument("--order", type=int, help="fixed quadrature order per density part")
        sp.add_argument("--tolerance", type=float)

    sp = sub.add_parser("certify", help="certify V(0,b] or V[a,b] membership")
    common(sp, symbol=False)
    sp.add_argument("--kind", choices=("V0b", "Vab"))

    sp = sub.add_parser("apply", help="compute f(A) and compare with oracles")
    common(sp)
    sp.add_argument("--oracle", choices=("eig", "contour", "both", "none"), default="both")

    sp = sub.add_parser("perturb", help="evaluate perturbation bounds")
    common(sp)
    sp.add_argument("--bound", choices=BOUND_IDS)
    sp.add_argument("--U")
    sp.add_argument("--suite", action="store_true", help="run seeded randomized suites")
    sp.add_argument("--trials", type=int, default=20)

    sp = sub.add_parser("frechet", help="Fréchet derivative in a direction")
    common(sp)
    sp.add_argument("--direction")
    sp.add_argument("--fd-check", action="store_true")

    sp = sub.add_parser("taylor", help="Taylor series of f(A + zB) - f(A)")
    common(sp)
    sp.add_argument("--direction")
    sp.add_argument("--z", required=True, help="re,im")
    sp.add_argument("--terms", type=int)

    sp = sub.add_parser("trace-shift", help="trace formula via the spectral shift function")
    common(sp)
    sp.add_argument("--contour", help="ellipse:cx,cy,rx,ry[,N] | stadium:cx,cy,L,r[,N]")
    sp.add_argument("--csv", help="write xi at contour nodes as CSV")

    sp = sub.add_parser("selftest", help="run a compact version of all checks")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--out")

    sp = sub.add_parser("fixtures", help="write a reproducible fixture file")
    sp.add_argument("--kind", required=True, choices=fx.KINDS)
    sp.add_argument("--params", help="JSON object of generator parameters")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = COMMANDS[args.command](args)
    except (UsageError, DomainError, NotInClassError, CertificateMismatchError,
            PreconditionError, RadiusError) as exc:
        sys.stderr.write(f"markov-opcalc: error: {exc}\n")
        return 2
    if args.command == "fixtures":
        text = fx.dumps(report)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    emit(report, args.out)
    return 0 if report["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
