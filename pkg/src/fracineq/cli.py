"""Command-line surface.

Exit codes: 0 success, 1 usage or domain error (one-line diagnostic on
stderr naming the violated invariant), 2 hard violations from a sweep.
Results go to stdout only; errors go to stderr only. Tables print 10
significant digits; files and ``--json`` output carry full precision.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from .errors import FracineqError
from .expr import parse_function, to_text
from .fracint import FracParams, Interval, conjugate_exponent, katugampola
from .harness import (load_config, reproduce_reference, run_sweep, write_csv,
                      write_json)
from .ineq import (VARIANT_DERIVED, VARIANT_PRINTED, certify_s_convex,
                   gap_bound_t2, gap_bound_t3, gap_bound_t4, hh_sandwich,
                   lemma_identity, min_bound)
from .means import check_proposition
from .quad import QuadSettings

_VARIANT_OF_FLAG = {"printed": VARIANT_PRINTED, "derived": VARIANT_DERIVED}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _print_table(pairs):
    width = max(len(k) for k, _ in pairs)
    for key, value in pairs:
        print(f"{key:<{width}}  {_fmt(value)}")


def _print_json(obj):
    print(json.dumps(obj, indent=1))


def _settings(args) -> QuadSettings:
    return QuadSettings(abs_tol=args.abs_tol, rel_tol=args.rel_tol,
                        max_levels=args.max_levels)


def _add_quad_flags(sub):
    sub.add_argument("--abs-tol", type=float, default=1e-10,
                     help="quadrature absolute tolerance")
    sub.add_argument("--rel-tol", type=float, default=1e-10,
                     help="quadrature relative tolerance")
    sub.add_argument("--max-levels", type=int, default=10,
                     help="tanh-sinh refinement depth")


def _add_common(sub, with_rho=True):
    sub.add_argument("--psi", required=True,
                     help="expression text or named family "
                          "(power(c), recip, affine(a,b))")
    sub.add_argument("--u", type=float, required=True, help="left endpoint")
    sub.add_argument("--v", type=float, required=True, help="right endpoint")
    sub.add_argument("--alpha", type=float, required=True,
                     help="fractional order, > 0")
    if with_rho:
        sub.add_argument("--rho", type=float, required=True,
                         help="deformation parameter, > 0")
    sub.add_argument("--json", action="store_true",
                     help="print a machine-readable JSON object instead "
                          "of a table")


def _cmd_eval_integral(args) -> int:
    psi = parse_function(args.psi)
    result = katugampola(args.side, psi, Interval(args.u, args.v),
                         args.alpha, args.rho, _settings(args))
    if args.json:
        _print_json({"value": result.value,
                     "err_estimate": result.err_estimate,
                     "evaluations": result.evaluations})
    else:
        _print_table([("side", args.side), ("value", result.value),
                      ("err_estimate", result.err_estimate),
                      ("evaluations", result.evaluations)])
    return 0


def _sandwich_dict(report):
    return {"lhs": report.lhs, "middle": report.middle, "rhs": report.rhs,
            "margin_left": report.margin_left,
            "margin_right": report.margin_right,
            "holds_left": report.holds[0], "holds_right": report.holds[1],
            "quad_err": report.quad_err}


def _cmd_check_hh(args) -> int:
    psi = parse_function(args.psi)
    iv = Interval(args.u, args.v)
    fp = FracParams(alpha=args.alpha, rho=args.rho, s=args.s)
    settings = _settings(args)
    variants = ([VARIANT_PRINTED, VARIANT_DERIVED] if args.variant == "both"
                else [_VARIANT_OF_FLAG[args.variant]])
    out = {}
    for variant in variants:
        report = hh_sandwich(psi, iv, fp, variant, settings)
        out[variant] = _sandwich_dict(report)
        if not args.json:
            print(f"variant: {variant}")
            _print_table([(k, v) for k, v in out[variant].items()])
    if args.json:
        _print_json(out)
    return 0


def _cmd_check_gap(args) -> int:
    psi = parse_function(args.psi)
    iv = Interval(args.u, args.v)
    settings = _settings(args)

    if args.theorem == "lemma":
        report = lemma_identity(psi, iv, args.alpha, args.rho, settings)
        payload = {"side_a": report.side_a, "side_b": report.side_b,
                   "residual": report.residual, "quad_err": report.quad_err}
        if args.json:
            _print_json(payload)
        else:
            _print_table(list(payload.items()))
        return 0

    q = args.q
    p = args.p
    if args.theorem in ("t4", "min") and p is None:
        p = conjugate_exponent(q)
    fp = FracParams(alpha=args.alpha, rho=args.rho, s=args.s, q=q, p=p)
    fn = {"t2": gap_bound_t2, "t3": gap_bound_t3, "t4": gap_bound_t4,
          "min": min_bound}[args.theorem]
    variants = ([VARIANT_PRINTED, VARIANT_DERIVED] if args.variant == "both"
                else [_VARIANT_OF_FLAG[args.variant]])
    out = {}
    for variant in variants:
        report = fn(psi, iv, fp, settings, variant=variant)
        entry = {"gap": report.gap, "bound": report.bound,
                 "theorem": report.theorem, "holds": report.holds,
                 "quad_err": report.quad_err}
        if report.components is not None:
            entry["m1"], entry["m2"], entry["m3"] = report.components
            entry["argmin"] = report.argmin
        out[variant] = entry
        if not args.json:
            print(f"variant: {variant}")
            _print_table(list(entry.items()))
    if args.json:
        _print_json(out)
    return 0


def _cmd_certify(args) -> int:
    psi = parse_function(args.psi)
    cert = certify_s_convex(psi, Interval(args.u, args.v), args.s,
                            args.alpha, grid=args.grid)
    payload = {"is_certified": cert.is_certified,
               "worst_violation": cert.worst_violation,
               "samples": cert.samples}
    if cert.witness is not None:
        payload["witness_a"], payload["witness_b"], payload["witness_t"] = \
            cert.witness
    if args.json:
        _print_json(payload)
    else:
        _print_table(list(payload.items()))
    return 0


def _cmd_means(args) -> int:
    report = check_proposition(f"P{args.prop}", args.u, args.v,
                               r=args.r, q=args.q)
    payload = asdict(report)
    if args.json:
        _print_json(payload)
    else:
        _print_table(list(payload.items()))
    return 0


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    result = run_sweep(cfg)
    write_csv(result.rows, args.out_csv)
    if args.out_json:
        write_json(result.rows, args.out_json)
    hard = result.hard_violations
    informative = [v for v in result.violations if v.severity != "hard"]
    print(f"rows: {len(result.rows)}")
    print(f"informative violations: {len(informative)}")
    print(f"hard violations: {len(hard)}")
    for record in hard:
        print(f"  [{record.check}] margin/lhs {_fmt(record.lhs_or_margin)} "
              f"reproduce: {record.command}")
    return 2 if hard else 0


def _cmd_reproduce(args) -> int:
    rows = reproduce_reference()
    if args.json:
        _print_json([asdict(r) for r in rows])
        return 0
    print("reference-example audit "
          f"(match tolerance {_fmt(1e-3)}; 'computed' is the as-printed "
          "formula, middle by quadrature)")
    for row in rows:
        print(f"triple {row.triple} {row.member:<6} "
              f"paper: {_fmt(row.reference)} / "
              f"computed: {_fmt(row.as_printed)} / "
              f"status: {row.status} / "
              f"derivation_consistent: {_fmt(row.derived)}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="fracineq",
                     description="Fractional-integral Hermite-Hadamard "
                                 "inequality checker")
    subs = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    sub = subs.add_parser("eval-integral", formatter_class=fmt,
                          help="evaluate one side of the fractional "
                               "integral pair")
    _add_common(sub)
    sub.add_argument("--side", choices=("left", "right"), required=True)
    _add_quad_flags(sub)
    sub.set_defaults(func=_cmd_eval_integral)

    sub = subs.add_parser("check-hh", formatter_class=fmt,
                          help="three-member sandwich check")
    _add_common(sub)
    sub.add_argument("--s", type=float, required=True,
                     help="convexity index in (0, 1]")
    sub.add_argument("--variant", choices=("printed", "derived", "both"),
                     default="both")
    _add_quad_flags(sub)
    sub.set_defaults(func=_cmd_check_hh)

    sub = subs.add_parser("check-gap", formatter_class=fmt,
                          help="trapezoid-gap bound or identity check")
    _add_common(sub)
    sub.add_argument("--theorem", choices=("t2", "t3", "t4", "min", "lemma"),
                     required=True)
    sub.add_argument("--s", type=float, default=1.0,
                     help="convexity index in (0, 1]")
    sub.add_argument("--q", type=float, default=1.0,
                     help="power-mean exponent, >= 1")
    sub.add_argument("--p", type=float, default=None,
                     help="Hoelder conjugate of q (default: q/(q-1) "
                          "where needed)")
    sub.add_argument("--variant", choices=("printed", "derived", "both"),
                     default="both")
    _add_quad_flags(sub)
    sub.set_defaults(func=_cmd_check_gap)

    sub = subs.add_parser("certify", formatter_class=fmt,
                          help="probe generalized s-convexity on "
                               "[u, v] (the psi domain)")
    sub.add_argument("--psi", required=True)
    sub.add_argument("--s", type=float, required=True)
    sub.add_argument("--alpha", type=float, required=True)
    sub.add_argument("--u", type=float, default=0.0, help="domain left end")
    sub.add_argument("--v", type=float, default=1.0, help="domain right end")
    sub.add_argument("--grid", type=int, default=16,
                     help="lattice resolution per axis, >= 8")
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(func=_cmd_certify)

    sub = subs.add_parser("means", formatter_class=fmt,
                          help="special-means proposition check")
    sub.add_argument("--prop", type=int, choices=(1, 2, 3, 4), required=True)
    sub.add_argument("--u", type=float, required=True)
    sub.add_argument("--v", type=float, required=True)
    sub.add_argument("--r", type=int, default=None,
                     help="integer power |r| >= 2 (propositions 1 and 2)")
    sub.add_argument("--q", type=float, default=1.0)
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(func=_cmd_means)

    sub = subs.add_parser("sweep", formatter_class=fmt,
                          help="run a configured verification sweep")
    sub.add_argument("--config", required=True, help="JSON sweep config")
    sub.add_argument("--out-csv", required=True, help="CSV output path")
    sub.add_argument("--out-json", default=None, help="JSON output path")
    sub.set_defaults(func=_cmd_sweep)

    sub = subs.add_parser("reproduce", formatter_class=fmt,
                          help="audit the built-in reference example "
                               "triples and flag discrepancies")
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FracineqError as exc:
        print(f"fracineq: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
