"""Command-line interface: ``nchodge check|analyze|sm|scan``.

Exit codes: 0 success, 2 semantic failure (an axiom fails, a verdict
disagrees, a scan has disagreements), 1 I/O, parse or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import io
from .algebra import WedderburnError, circle_algebra, commutant, wedderburn
from .linalg import DEFAULT_TOL, Tolerance
from .standard_model import (
    CaseVerdictConflict,
    cc_params,
    classify_cases,
    hodge_closed,
    second_order_closed,
    sm_build,
)
from .triple import (
    ConsistencyError,
    clifford,
    commutes_with_algebra,
    decompose,
    first_order_via_decomposition,
    hodge,
    omega1,
    second_order,
    validate,
)

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
ENV_REL, ENV_ABS = "NCHODGE_TOL_REL", "NCHODGE_TOL_ABS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are operational errors (exit 1), keeping 2 for semantic failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"{name}={raw!r} is not a number") from None


def tolerance_from(args) -> Tolerance:
    """Flags beat environment variables, which beat the defaults."""
    rel = args.tol if args.tol is not None else _env_float(ENV_REL, DEFAULT_TOL.rel)
    floor = args.abs_floor if args.abs_floor is not None else _env_float(ENV_ABS, DEFAULT_TOL.abs_floor)
    try:
        return Tolerance(rel, floor)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _tol_dict(tol: Tolerance) -> dict:
    return {"rel": tol.rel, "abs_floor": tol.abs_floor}


def _tol_line(tol: Tolerance) -> str:
    return f"tolerance: rel={tol.rel:g} abs_floor={tol.abs_floor:g}"


def _emit_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _yes(flag) -> str:
    return {True: "yes", False: "no", None: "n/a"}[flag]


# ---------------------------------------------------------------------------
# check / analyze

def cmd_check(args) -> int:
    tol = tolerance_from(args)
    t = io.read_triple(args.file)
    rep = validate(t, tol)
    if args.json:
        _emit_json({
            "schema_version": io.SCHEMA_VERSION,
            "file": str(args.file),
            "tolerance": _tol_dict(tol),
            "ok": rep.ok,
            "checks": [{"name": c.name, "passed": c.passed, "residual": c.residual, "threshold": c.threshold}
                       for c in rep.checks],
            "warnings": rep.warnings,
        })
    else:
        print(f"check {args.file} (dim H = {t.dim_h})")
        print(_tol_line(tol))
        for c in rep.checks:
            mark = "pass" if c.passed else "FAIL"
            print(f"  {mark}  {c.name:<32} residual {c.residual:.3e}  (threshold {c.threshold:.3e})")
        for w in rep.warnings:
            print(f"  warning: {w}")
        print("all axioms hold" if rep.ok else f"{len(rep.failures())} axiom(s) fail")
    return EXIT_OK if rep.ok else EXIT_FAIL


def _blocks(alg, tol):
    try:
        return wedderburn(alg, tol).block_table()
    except WedderburnError as exc:
        return f"unavailable ({exc})"


def analyze_triple(t, tol: Tolerance = DEFAULT_TOL) -> dict:
    """Everything ``analyze`` reports, as a JSON-ready dict."""
    rep = validate(t, tol)
    a = t.complex_algebra(tol)
    om = omega1(t, tol)
    cl = clifford(t, tol)
    cl_comm = commutant(cl, tol)
    cl_opp = circle_algebra(cl, t.j, tol)
    fo = first_order_via_decomposition(t, tol)
    so = second_order(t, tol)
    h = hodge(t, tol)
    dec = decompose(t, tol)
    dr_in, dr_res = commutes_with_algebra(t, dec.dr, tol)
    warnings = list(rep.warnings)
    if not dr_in:
        warnings.append("D_R is not in the commutant A'")
    return {
        "schema_version": io.SCHEMA_VERSION,
        "tolerance": _tol_dict(tol),
        "dim_h": t.dim_h,
        "axioms_ok": rep.ok,
        "failed_axioms": [c.name for c in rep.failures()],
        "dims": {"A_C": a.dim, "Omega1": om.dim, "Cl": cl.dim, "Cl_commutant": cl_comm.dim,
                 "Cl_opposite": cl_opp.dim},
        "wedderburn": {"A_C": t.structure(tol).block_table(), "Cl": _blocks(cl, tol),
                       "Cl_commutant": _blocks(cl_comm, tol)},
        "first_order": {"holds": fo.holds, "witness": fo.witness},
        "second_order": {"holds": so.holds, "residual": so.residual, "threshold": so.threshold,
                         "dr_in_commutant": so.dr_in_commutant, "d0_d1_commutator": so.d0_d1_commutator},
        "hodge": h.as_dict(),
        "decomposition_norms": dec.norms(),
        "dr_in_commutant": dr_in,
        "dr_commutant_residual": dr_res,
        "warnings": warnings,
    }


def _table(rows) -> str:
    if isinstance(rows, str):
        return rows
    return ", ".join(f"M_{m} x {k}" for m, k in rows) or "(none)"


def cmd_analyze(args) -> int:
    tol = tolerance_from(args)
    t = io.read_triple(args.file)
    r = analyze_triple(t, tol)
    if args.json:
        r["file"] = str(args.file)
        _emit_json(r)
        return EXIT_OK
    d = r["dims"]
    print(f"analyze {args.file} (dim H = {r['dim_h']})")
    print(_tol_line(tol))
    if not r["axioms_ok"]:
        print(f"  axioms failing: {', '.join(r['failed_axioms'])}")
    print(f"  dim A_C = {d['A_C']}, dim Omega^1 = {d['Omega1']}")
    print(f"  dim Cl = {d['Cl']}, dim Cl' = {d['Cl_commutant']}, dim Cl° = {d['Cl_opposite']}")
    for name, label in (("A_C", "A_C"), ("Cl", "Cl"), ("Cl_commutant", "Cl'")):
        print(f"  Wedderburn {label:<4}: {_table(r['wedderburn'][name])}")
    fo, so, h = r["first_order"], r["second_order"], r["hodge"]
    print(f"  1st order: {_yes(fo['holds'])}" + (f" ({fo['witness']})" if fo["witness"] else ""))
    print(f"  2nd order: {_yes(so['holds'])} (residual {so['residual']:.3e}, threshold {so['threshold']:.3e})")
    print(f"  Hodge:     {_yes(h['holds'])}")
    norms = "  ".join(f"||{k}|| = {v:.6g}" for k, v in r["decomposition_norms"].items())
    print(f"  decomposition: {norms}")
    for w in r["warnings"]:
        print(f"  warning: {w}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sm

def _read_params(path):
    if path == "-":
        return io.loads_params(sys.stdin.read())
    return io.read_params(path)


def cmd_sm_build(args) -> int:
    p = _read_params(args.params)
    text = io.dumps_triple(sm_build(p).triple)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sm_cc(args) -> int:
    p = cc_params(args.yn, args.ye, args.yu, args.yd, args.yr)
    text = io.dumps_params(p)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def classify_report(p, tol: Tolerance = DEFAULT_TOL) -> dict:
    """Closed-form classification of SM parameters next to the engine's verdicts."""
    sm = sm_build(p)
    cases = sorted(classify_cases(p, tol)) if p.generations == 1 else None
    so_closed = second_order_closed(p, tol)
    closed, note = None, None
    if p.generations != 1:
        note = "no closed form (several generations)"
    else:
        try:
            closed = hodge_closed(p, tol)
        except CaseVerdictConflict as exc:
            note = f"closed forms conflict: {exc}"
        if closed is None and note is None:
            note = "no closed form (2nd order fails)"
    so = second_order(sm.triple, tol)
    h = hodge(sm.triple, tol)
    warnings = ["degenerate: Omega^1_D(A) = {0}"] if h.degenerate else []
    agree = so.holds == so_closed and (closed is None or closed == h.holds)
    return {
        "schema_version": io.SCHEMA_VERSION,
        "tolerance": _tol_dict(tol),
        "generations": p.generations,
        "cases": cases,
        "second_order_closed": so_closed,
        "hodge_closed": closed,
        "hodge_closed_note": note,
        "engine": {"second_order": so.holds, "hodge": h.holds, "clifford_dim": h.clifford_dim},
        "agree": agree,
        "warnings": warnings,
    }


def cmd_sm_classify(args) -> int:
    tol = tolerance_from(args)
    r = classify_report(_read_params(args.params), tol)
    if args.json:
        _emit_json(r)
    else:
        print(f"classify (generations = {r['generations']})")
        print(_tol_line(tol))
        if r["cases"] is not None:
            print("  cases: {" + ", ".join(map(str, r["cases"])) + "}")
        print(f"  2nd order (closed form): {_yes(r['second_order_closed'])}")
        print(f"  Hodge (closed form):     {_yes(r['hodge_closed']) if r['hodge_closed_note'] is None else r['hodge_closed_note']}")
        e = r["engine"]
        print(f"  engine: 2nd order {_yes(e['second_order'])}, Hodge {_yes(e['hodge'])}, dim Cl = {e['clifford_dim']}")
        for w in r["warnings"]:
            print(f"  warning: {w}")
        print("  closed form and engine agree" if r["agree"] else "  DISAGREEMENT between closed form and engine")
    return EXIT_OK if r["agree"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# scan

def cmd_scan(args) -> int:
    from .scan import scan

    tol = tolerance_from(args)
    case = args.case if args.case == "all" else int(args.case)
    workers = args.workers or os.cpu_count() or 1
    rep = scan(case, args.samples, args.seed, args.degenerate_fraction, tol, workers)
    if args.json:
        print(rep.to_json(include_timing=not args.no_timing))
    else:
        print("\n".join(rep.summary_lines()))
        for d in rep.disagreements[:10]:
            print(f"  disagreement at sample {d['index']} (case {d['case']}): {', '.join(d['failures'])}")
    return EXIT_OK if rep.ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser

def _positive_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _fraction(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {s!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {v}")
    return v


def _complex_arg(s: str) -> complex:
    try:
        return complex(s.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a real or complex number such as 2 or 1+2j, got {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--tol", type=float, default=None,
                        help=f"relative tolerance (default {DEFAULT_TOL.rel:g}, env {ENV_REL})")
    common.add_argument("--abs-floor", type=float, default=None,
                        help=f"absolute tolerance floor (default {DEFAULT_TOL.abs_floor:g}, env {ENV_ABS})")

    p = _Parser(prog="nchodge", description="Order conditions and the Hodge property for finite spectral triples.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="validate the axioms of a triple file")
    c.add_argument("file")
    c.set_defaults(func=cmd_check)

    a = sub.add_parser("analyze", parents=[common], help="algebras, order conditions and Hodge verdict")
    a.add_argument("file")
    a.set_defaults(func=cmd_analyze)

    sm = sub.add_parser("sm", help="Standard-Model triples")
    smsub = sm.add_subparsers(dest="sm_command", required=True, parser_class=_Parser)
    b = smsub.add_parser("build", parents=[common], help="write the triple file for a parameter file")
    b.add_argument("params", help="parameter file, or - for stdin")
    b.add_argument("-o", "--out", help="output path (default stdout)")
    b.set_defaults(func=cmd_sm_build)
    k = smsub.add_parser("classify", parents=[common], help="closed-form classification plus engine cross-check")
    k.add_argument("params", help="parameter file, or - for stdin")
    k.set_defaults(func=cmd_sm_classify)
    cc = smsub.add_parser("cc", parents=[common], help="write diagonal-Yukawa parameters")
    for flag, name in (("--yn", "neutrino"), ("--ye", "electron"), ("--yu", "up"), ("--yd", "down")):
        cc.add_argument(flag, type=_complex_arg, required=True, help=f"{name} Yukawa coupling")
    cc.add_argument("--yr", type=_complex_arg, default=0.0, help="right-handed neutrino Majorana coupling")
    cc.add_argument("-o", "--out", help="output path (default stdout)")
    cc.set_defaults(func=cmd_sm_cc)

    s = sub.add_parser("scan", parents=[common], help="Monte Carlo check of closed forms against the engine")
    s.add_argument("--case", choices=["1", "2", "3", "4", "all"], required=True)
    s.add_argument("--samples", type=_positive_int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--degenerate-fraction", type=_fraction, default=0.25)
    s.add_argument("--workers", type=_positive_int, default=None,
                   help="worker processes (default: one per CPU); results do not depend on it")
    s.add_argument("--no-timing", action="store_true", help="omit the timing field from JSON output")
    s.set_defaults(func=cmd_scan)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"nchodge: error: {exc}", file=sys.stderr)
    except io.FormatError as exc:
        print(f"nchodge: parse error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"nchodge: I/O error: {exc}", file=sys.stderr)
    except ConsistencyError as exc:
        print(f"nchodge: internal consistency check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"nchodge: error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
