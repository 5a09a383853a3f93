"""``bellctl``: batch front end for evaluation, sweeps, verification and the oracle.

Exit codes: 0 success, 1 usage error, 2 verification violation, 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import bellman_forms as bf
from .errors import DomainError, InfeasibleError, ProjectionError
from .extremizers import (
    chain_function,
    concentrated_function,
    dp_near_extremizer,
    verify_bounds,
    _report,
)
from .infimum_oracle import ObjectiveSpec, feasible_project, results_to_csv, results_to_json, sandwich
from .tree_lab import integral, integral_power, maximal, random_step_function

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_INTERNAL = 0, 1, 2, 3

FORMULAS = ("lp", "dp", "weak", "bpq", "blq", "chain", "bq_less")
CONSTRUCTIONS = ("chain", "concentrated", "dp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(text: Optional[str]) -> list[float]:
    """Comma list ``a,b,c`` or inclusive linspace ``start:stop:num``."""
    if text is None:
        return []
    text = text.strip()
    if not text:
        raise UsageError("empty grid")
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            n = int(num)
            if n < 1:
                raise UsageError(f"grid {text!r} has no points")
            return [float(x) for x in np.linspace(float(start), float(stop), n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from None


def parse_depths(text: str) -> list[int]:
    """``1,2,3`` or inclusive range ``1-4``."""
    text = text.strip()
    try:
        if "-" in text and "," not in text:
            a, b = text.split("-")
            return list(range(int(a), int(b) + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse depth list {text!r}") from None


def fmt(x) -> str:
    """Shortest round-trip decimal for floats."""
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required flags: " + " ".join("--" + n for n in missing))


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_to_csv(columns: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _rows_to_json(rows: Sequence[dict]) -> str:
    return json.dumps(list(rows), indent=2) + "\n"


# -- subcommands ----------------------------------------------------------


def cmd_eval(args) -> int:
    formula = args.formula
    if formula is None:
        raise UsageError("--formula is required")
    N = args.N
    if formula == "lp":
        _require(args, "F", "f", "p", "N")
        print(fmt(float(bf.lp_lower(args.F, args.f, N, args.p))))
    elif formula == "dp":
        _require(args, "F", "f", "p", "N", "kappa")
        a = float(bf.dp_piecewise(args.F, args.f, args.kappa, N, args.p))
        b = float(bf.dp_min_form(args.F, args.f, args.kappa, N, args.p))
        print(fmt(a))
        print(f"dp_piecewise {fmt(a)}")
        print(f"dp_min_form {fmt(b)}")
        print(f"difference {fmt(a - b)}")
    elif formula == "weak":
        _require(args, "F", "f", "p", "q", "N")
        print(fmt(float(bf.weak_lower(args.F, args.f, N, args.p, args.q))))
    elif formula == "bpq":
        _require(args, "F", "f", "p", "q", "N")
        print(fmt(float(bf.bpq_lower(args.F, args.f, N, args.p, args.q))))
    elif formula == "blq":
        _require(args, "F", "f", "p", "q", "N", "L")
        print(fmt(float(bf.blq_lower(args.F, args.f, args.L, N, args.p, args.q))))
    elif formula == "chain":
        _require(args, "f", "p", "q", "N", "m")
        print(fmt(float(bf.bpq_chain_value(args.f, N, args.m, args.p, args.q))))
    elif formula == "bq_less":
        _require(args, "f", "q")
        if args.p is not None and not args.q < args.p:
            raise UsageError("bq_less needs q < p")
        print(fmt(float(bf.bq_less_p(args.f, args.q))))
    return EXIT_OK


SWEEP_COLUMNS = ("N", "p", "q", "F", "f", "kappa", "L", "lp", "dp", "dp_min", "weak", "bpq", "blq")


def cmd_sweep(args) -> int:
    _require(args, "f", "p", "N")
    F_grid = parse_grid(args.F_grid) if args.F_grid is not None else ([args.F] if args.F is not None else [])
    k_grid = parse_grid(args.kappa_grid) if args.kappa_grid is not None else (
        [args.kappa] if args.kappa is not None else [None])
    if not F_grid or not k_grid:
        raise UsageError("sweep needs a nonempty --F-grid (or --F) and --kappa-grid")
    rows = []
    for F in F_grid:
        for kappa in k_grid:
            row = {"N": args.N, "p": args.p, "q": args.q, "F": F, "f": args.f, "kappa": kappa, "L": args.L}
            row["lp"] = float(bf.lp_lower(F, args.f, args.N, args.p))
            if kappa is not None:
                row["dp"] = float(bf.dp_piecewise(F, args.f, kappa, args.N, args.p))
                row["dp_min"] = float(bf.dp_min_form(F, args.f, kappa, args.N, args.p))
            if args.q is not None and args.q > args.p:
                row["weak"] = float(bf.weak_lower(F, args.f, args.N, args.p, args.q))
                row["bpq"] = float(bf.bpq_lower(F, args.f, args.N, args.p, args.q))
                if args.L is not None:
                    row["blq"] = float(bf.blq_lower(F, args.f, args.L, args.N, args.p, args.q))
            rows.append(row)
    text = _rows_to_csv(SWEEP_COLUMNS, rows) if args.format == "csv" else _rows_to_json(rows)
    _emit(text, args.out)
    return EXIT_OK


VERIFY_COLUMNS = ("sample", "f", "F", "min_slack", "worst_check", "violations")


def cmd_verify(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    _require(args, "p", "N", "depth")
    f_target = args.f if args.f is not None else 1.0
    k_grid = parse_grid(args.kappa_grid) if args.kappa_grid else [(i + 1) / 9 for i in range(9)]
    L_factors = [1.0, 1.25, 1.5, 2.0, 3.0]
    rng = np.random.default_rng(args.seed)
    rows, failures, n_viol = [], 0, 0
    overall = math.inf
    for i in range(args.samples):
        phi = random_step_function(rng, args.N, args.depth)
        try:
            if args.F is not None:
                phi = feasible_project(phi, f_target, args.F, args.p)
            else:
                phi = phi.scaled(f_target / integral(phi))
        except ProjectionError:
            failures += 1
            continue
        f = integral(phi)
        rep = verify_bounds(phi, args.p, args.q, k_grid, [f * c for c in L_factors],
                            bound_scale=args.bound_scale)
        worst = min(rep.checks, key=lambda c: c.slack)
        viol = rep.violations(args.tol)
        n_viol += len(viol)
        overall = min(overall, rep.min_slack)
        rows.append({"sample": i, "f": rep.f, "F": rep.F, "min_slack": rep.min_slack,
                     "worst_check": f"{worst.name}@{fmt(float(worst.parameter))}",
                     "violations": len(viol)})
    text = _rows_to_csv(VERIFY_COLUMNS, rows) if args.format == "csv" else _rows_to_json(rows)
    _emit(text, args.out)
    print(f"samples={args.samples} projection_failures={failures} "
          f"min_slack={fmt(overall)} violations={n_viol}", file=sys.stderr)
    if failures > 0.01 * args.samples:
        print("projection failure budget exceeded", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_VIOLATION if n_viol else EXIT_OK


def cmd_oracle(args) -> int:
    _require(args, "F", "f", "p", "N")
    kind = args.objective
    spec = ObjectiveSpec(kind=kind, p=args.p, q=args.q, kappa=args.kappa, L=args.L)
    query = bf.BellmanQuery(N=args.N, p=args.p, F=args.F, f=args.f, q=args.q, kappa=args.kappa, L=args.L)
    depths = parse_depths(args.depth_list) if args.depth_list else [args.depth if args.depth is not None else 2]
    seeds = list(range(args.seed, args.seed + max(1, args.starts)))
    results = sandwich(query, spec, depths, seeds=seeds, iteration_budget=args.budget)
    text = results_to_csv(results) if args.format == "csv" else results_to_json(results) + "\n"
    _emit(text, args.out)
    for r in results:
        print(f"depth={r.m} lower={fmt(r.lower)} upper={fmt(r.upper)} gap={fmt(r.gap)}", file=sys.stderr)
    return EXIT_OK


def cmd_extremal(args) -> int:
    c = args.construction
    if c is None:
        raise UsageError("--construction is required")
    if c == "chain":
        _require(args, "N", "m", "f")
        phi = chain_function(args.N, args.m, args.f)
        p = args.p if args.p is not None else 2.0
        Mphi = maximal(phi)
        if args.q is not None:
            target = bf.bpq_chain_value(args.f, args.N, args.m, p, args.q)
            achieved = integral_power(Mphi, args.q)
        else:
            target = bf.lp_lower(integral_power(phi, p), args.f, args.N, p)
            achieved = integral_power(Mphi, p)
        report = _report(target, achieved, integral(phi), integral_power(phi, p), phi.depth)
    elif c == "concentrated":
        _require(args, "N", "m", "f", "F", "p")
        phi, report = concentrated_function(args.N, args.m, args.f, args.F, args.p,
                                            depth_extension=args.depth, q=args.q)
    else:
        _require(args, "N", "f", "F", "p", "kappa", "depth")
        try:
            phi, report = dp_near_extremizer(args.F, args.f, args.kappa, args.N, args.p, args.depth)
        except DomainError as exc:
            raise UsageError(f"{exc} (kappa must be N-adic at the working depth)") from None
    if args.format == "json":
        text = json.dumps({"function": phi.to_dict(), "report": report.to_dict()}, indent=2) + "\n"
    else:
        cols = ("target_value", "achieved_value", "achieved_f", "achieved_F", "depth", "relative_gap")
        text = _rows_to_csv(cols, [report.to_dict()]) + phi.to_csv_row() + "\n"
    _emit(text, args.out)
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "extremal": cmd_extremal,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, default=2, help="branching factor (default 2)")
    common.add_argument("--depth", type=int)
    common.add_argument("--p", type=float)
    common.add_argument("--q", type=float)
    common.add_argument("--F", type=float)
    common.add_argument("--f", type=float)
    common.add_argument("--kappa", type=float)
    common.add_argument("--L", type=float)
    common.add_argument("--m", type=int)
    common.add_argument("--formula", choices=FORMULAS)
    common.add_argument("--construction", choices=CONSTRUCTIONS)
    common.add_argument("--samples", type=int, default=100)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out")
    common.add_argument("--kappa-grid", dest="kappa_grid")
    common.add_argument("--F-grid", dest="F_grid")
    common.add_argument("--depth-list", dest="depth_list")
    common.add_argument("--objective", choices=("strong_q", "top_kappa_p", "max_with_L"), default="strong_q")
    common.add_argument("--starts", type=int, default=2, help="number of seeds for the oracle")
    common.add_argument("--budget", type=int, default=1500, help="evaluations per oracle start")
    common.add_argument("--bound-scale", dest="bound_scale", type=float, default=1.0,
                        help=argparse.SUPPRESS)

    parser = _Parser(prog="bellctl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, DomainError, InfeasibleError) as exc:
        print(f"bellctl {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProjectionError as exc:
        print(f"bellctl {args.command}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
