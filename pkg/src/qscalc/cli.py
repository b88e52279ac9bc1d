"""Command-line interface: reduce expressions, derive tables, run the
numeric verification suite, solve the reflection constraints.

Exit status: 0 success, 1 a check or comparison failed, 2 usage/config
errors.  JSON artifacts are deterministic byte-for-byte for a fixed
configuration (timings are excluded unless --timings is given).
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .algebra import (UnsupportedExpectationError, normal_order,
                      solve_reflection_constraints)
from .atoms import flag_from_name
from .exprparse import ParseError, lower_level0, parse_expr, print_poly
from .fockrep import (DimensionGuardError, LatticeConfig, verify_suite)
from .ito import thermal_ito_table, vacuum_ito_table
from .thermal import ThermalParams


def _parse_nbar(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid occupation {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qscalc",
        description="Quantum stochastic calculus: symbolic Ito tables for "
                    "boson/fermion noise with a finite-lattice numeric verifier.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--stat", choices=("boson", "fermion"), default="boson",
                       help="particle statistics (default: boson)")
        p.add_argument("--format", choices=("text", "markdown", "json"),
                       default="text", help="output format")
        p.add_argument("--out", metavar="PATH",
                       help="write the artifact to this file (UTF-8)")

    p_reduce = sub.add_parser("reduce", help="normal-order an operator expression")
    add_common(p_reduce)
    p_reduce.add_argument("--expect", metavar="TEXT",
                          help="compare the canonical result against this "
                               "expression; exit 1 on mismatch")
    p_reduce.add_argument("expression", help="operator expression to reduce")

    p_table = sub.add_parser("table", help="derive an Ito multiplication table")
    add_common(p_table)
    p_table.add_argument("--nbar", type=_parse_nbar, default=None,
                         help="numeric occupation (rational, e.g. 1/2 or 0.2); "
                              "default keeps nbar symbolic")
    p_table.add_argument("--vacuum", action="store_true",
                         help="emit the 3x3 vacuum table instead of the thermal one")

    p_verify = sub.add_parser("verify", help="run the numeric verification suite")
    add_common(p_verify)
    p_verify.add_argument("--nbar", type=_parse_nbar, default=Fraction(1, 5))
    p_verify.add_argument("--slots", type=int, default=4, help="lattice slots N")
    p_verify.add_argument("--dt", type=float, default=0.1, help="slot width")
    p_verify.add_argument("--cutoff", type=int, default=None,
                          help="per-mode boson dimension (fermion: fixed 2)")
    p_verify.add_argument("--tol", type=float, default=None,
                          help="override the algebra tolerance")
    p_verify.add_argument("--timings", action="store_true",
                          help="include wall times in the JSON artifact "
                               "(breaks byte-for-byte determinism)")

    p_constraints = sub.add_parser(
        "constraints", help="solve the reflection weight constraints")
    add_common(p_constraints)
    return parser


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    print(text)


def cmd_reduce(args) -> int:
    flag = flag_from_name(args.stat)
    poly = lower_level0(parse_expr(args.expression), flag)
    reduced = normal_order(poly, flag)
    text = print_poly(reduced)
    _emit(text, args.out)
    if args.expect is not None:
        expected = normal_order(lower_level0(parse_expr(args.expect), flag), flag)
        if expected != reduced:
            print(f"mismatch: expected {print_poly(expected)}", file=sys.stderr)
            return 1
    return 0


def cmd_table(args) -> int:
    flag = flag_from_name(args.stat)
    params = ThermalParams(nbar=args.nbar, flag=flag)
    if args.vacuum:
        table = vacuum_ito_table(flag)
    else:
        table = thermal_ito_table(flag, params)
    if args.format == "json":
        _emit(table.to_json(), args.out)
    elif args.format == "markdown":
        _emit(table.to_markdown(), args.out)
    else:
        _emit(table.to_text(), args.out)
    return 0


def cmd_verify(args) -> int:
    flag = flag_from_name(args.stat)
    cutoff = args.cutoff if args.cutoff is not None else (2 if flag.sigma == -1 else 8)
    cfg = LatticeConfig(n_slots=args.slots, dt=args.dt, flag=flag,
                        cutoff=cutoff, doubled=True)
    params = ThermalParams(nbar=args.nbar, flag=flag)
    report = verify_suite(cfg, nbar=float(params.nbar),
                          algebra_tol=args.tol)
    json_text = report.to_json(include_timings=args.timings)
    if args.format == "json":
        _emit(json_text, args.out)
    else:
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(json_text + "\n")
        print("\n".join(report.summary_lines()))
    return 0 if report.passed else 1


def cmd_constraints(args) -> int:
    flag = flag_from_name(args.stat)
    lt, gt = solve_reflection_constraints(flag)
    if args.format == "json":
        import json
        _emit(json.dumps({"statistics": flag.name, "sigma_lt": lt,
                          "sigma_gt": gt}, sort_keys=True), args.out)
    else:
        _emit(f"{flag.name}: sigma_< = {lt:+d}, sigma_> = {gt:+d}", args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"reduce": cmd_reduce, "table": cmd_table,
                "verify": cmd_verify, "constraints": cmd_constraints}
    try:
        return handlers[args.command](args)
    except (ParseError, UnsupportedExpectationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DimensionGuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
