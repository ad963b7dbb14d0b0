"""Command-line interface: ``solve``, ``reproduce`` and ``analyze``.

Exit codes: 0 on success (converged, every table cell within tolerance),
1 on usage errors, 2 on numerical failure or a table mismatch. Set
``DCT3MG_LOG`` (``DEBUG``, ``INFO``, ...) to control log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

from . import analysis, tables
from .errors import Dct3mgError, UsageError
from .solver import RHS_MODES, SolveOptions, build_hierarchy, make_rhs, solve
from .symbol import CosPoly, ZeroInfo

log = logging.getLogger("dct3mg")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

SOLVE_CSV = ("iteration", "relative_residual")
TABLE_CSV = ("table", "dim", "zero", "q", "r", "m", "method", "expected", "iterations", "tol", "converged", "passed")
THEORY_CSV = ("s", "m", "q", "location", "omega_pre", "omega_post", "alpha", "beta", "gamma", "mu_inf", "lower_bound")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _power_of_two_sizes(text: str, dim: int) -> tuple:
    parts = [p for p in text.lower().replace("x", ",").split(",") if p]
    try:
        sizes = tuple(int(p) for p in parts)
    except ValueError:
        raise UsageError(f"invalid size {text!r}") from None
    if len(sizes) == 1:
        sizes = sizes * dim
    if len(sizes) != dim:
        raise UsageError(f"size {text!r} does not match --dim {dim}")
    for m in sizes:
        if m < 16 or m & (m - 1):
            raise UsageError(f"size {m} must be a power of 2 and at least 16")
    return sizes


def _r_value(text):
    if text is None or str(text).lower() == "auto":
        return None
    try:
        r = int(text)
    except ValueError:
        raise UsageError(f"--r must be an integer or 'auto', got {text!r}") from None
    if r < 1:
        raise UsageError("--r must be >= 1 or 'auto'")
    return r


def _symbol(args, dim: int, q: int):
    """Finest symbol from ``--symbol`` coefficients or the standard family."""
    if args.symbol:
        try:
            coeffs = [float(c) for c in str(args.symbol).split(",")]
        except ValueError:
            raise UsageError(f"invalid --symbol {args.symbol!r}") from None
        if dim != 1:
            raise UsageError("--symbol takes 1D cosine coefficients")
        return CosPoly(coeffs)
    return tables.finest_symbol(dim, args.zero, q)


def _zero(args, dim: int, q: int):
    if args.zero == "none":
        return None
    return ZeroInfo.at(args.zero, 2 * q, dim)


def _add_problem_flags(p):
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--zero", choices=("0", "pi", "none"), default="0", help="location of the symbol zero")
    p.add_argument("--q", type=int, default=1, help="zero order is 2q")
    p.add_argument("--r", default="auto", help="projector order, or 'auto' to follow the zero order")
    p.add_argument("--size", default="64", help="finest grid per dimension, e.g. 512 or 64x64")
    p.add_argument("--symbol", default=None, help="1D cosine coefficients c0,c1,... overriding the family")
    p.add_argument("--omega-pre-scale", type=float, default=1.0)
    p.add_argument("--omega-post-scale", type=float, default=2.0)
    p.add_argument("--projector-form", choices=("auto", "product", "sum"), default="auto")
    p.add_argument("--output", choices=("json", "csv", "markdown"), default="json")
    p.add_argument("--config", default=None, help="flat key=value file; flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dct3mg", description="Multigrid for DCT-III algebra systems.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ps = sub.add_parser("solve", help="solve one system")
    _add_problem_flags(ps)
    ps.add_argument("--method", choices=("tgm", "vcycle"), default="vcycle")
    ps.add_argument("--tol", type=float, default=1e-7)
    ps.add_argument("--max-iters", type=int, default=1000)
    ps.add_argument("--seed", type=int, default=42)
    ps.add_argument("--rhs", choices=RHS_MODES, default="linear")

    pr = sub.add_parser("reproduce", help="rerun a reference table")
    pr.add_argument("--table", type=int, choices=sorted(tables.TABLES), required=True)
    pr.add_argument("--sizes", default=None, help="comma-separated subset of 16,...,512")
    pr.add_argument("--methods", default="tgm,vcycle")
    pr.add_argument("--rhs", choices=RHS_MODES, default="linear")
    pr.add_argument("--seed", type=int, default=42)
    pr.add_argument("--tol", type=float, default=1e-7)
    pr.add_argument("--max-iters", type=int, default=1000)
    pr.add_argument("--jobs", type=int, default=1)
    pr.add_argument("--output", choices=("json", "csv", "markdown"), default="markdown")
    pr.add_argument("--config", default=None)

    pa = sub.add_parser("analyze", help="theory constants and measured contraction")
    _add_problem_flags(pa)
    pa.add_argument("--accounting", choices=("post", "pre", "both"), default="post")
    pa.add_argument("--measure", action="store_true", help="also compute the dense A-norm contraction")
    pa.add_argument("--cap", type=int, default=None, help="dense cap (unknowns) for --measure")
    return parser


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in cfg.items():
            if key not in known or key in ("help", "config"):
                raise UsageError(f"unknown config key {key!r}")
            action = known[key]
            if isinstance(action, argparse._StoreTrueAction):
                defaults[key] = value.lower() in ("1", "true", "yes", "on")
            else:
                conv = action.type or str
                defaults[key] = conv(value)
                if action.choices is not None and defaults[key] not in action.choices:
                    raise UsageError(f"config {key}={value!r} is not one of {list(action.choices)}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _markdown(header, rows) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join("" if v is None else str(v) for v in row) + " |" for row in rows]
    return "\n".join(lines)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _emit(fmt: str, payload: dict, header, rows, out) -> None:
    if fmt == "json":
        out.write(json.dumps(payload, indent=2) + "\n")
    elif fmt == "csv":
        out.write(_csv(header, rows) + "\n")
    else:
        out.write(_markdown(header, rows) + "\n")


def cmd_solve(args, out=None) -> int:
    out = out or sys.stdout
    sizes = _power_of_two_sizes(args.size, args.dim)
    r = _r_value(args.r)
    f = _symbol(args, args.dim, args.q)
    zero = _zero(args, args.dim, args.q)
    setup = dict(
        r=r,
        omega_pre_scale=args.omega_pre_scale,
        omega_post_scale=args.omega_post_scale,
        projector_form=args.projector_form,
    )
    if args.method == "tgm":
        setup.update(max_levels=2, coarsest=min(sizes) // 2)
    h = build_hierarchy(f, zero, sizes, **setup)
    opts = SolveOptions(method=args.method, tol=args.tol, max_iters=args.max_iters, rhs=args.rhs, seed=args.seed)
    rep = solve(h, make_rhs(h, args.rhs, args.seed), opts)
    payload = {
        "method": rep.method,
        "dim": args.dim,
        "q": args.q,
        "r": "auto" if r is None else r,
        "sizes": list(sizes),
        "iterations": rep.iterations,
        "converged": rep.converged,
        "final_relative_residual": rep.final_relative_residual,
        "residual_history": rep.residual_history,
        "levels": rep.levels,
        "seed": args.seed,
        "rhs": args.rhs,
        "elapsed_ms": rep.elapsed_ms,
    }
    rows = [(i + 1, f"{v:.6e}") for i, v in enumerate(rep.residual_history)]
    _emit(args.output, payload, SOLVE_CSV, rows, out)
    return EXIT_OK if rep.converged else EXIT_NUMERIC


def cmd_reproduce(args, out=None) -> int:
    out = out or sys.stdout
    sizes = tables.SIZES
    if args.sizes:
        sizes = tuple(int(s) for s in args.sizes.split(","))
        bad = [m for m in sizes if m not in tables.SIZES]
        if bad:
            raise UsageError(f"sizes {bad} are not table rows {tables.SIZES}")
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    if not methods or any(m not in ("tgm", "vcycle") for m in methods):
        raise UsageError(f"invalid --methods {args.methods!r}")
    results = tables.reproduce(
        args.table, sizes, methods, jobs=args.jobs, rhs=args.rhs, seed=args.seed, tol=args.tol, max_iters=args.max_iters
    )
    rows = [
        (
            c.table,
            c.dim,
            c.location,
            c.q,
            "auto" if c.r is None else c.r,
            c.m,
            c.method,
            "-" if c.expected is None else c.expected,
            "-" if c.iterations is None else c.iterations,
            c.tol,
            c.converged,
            "skip" if c.skipped else ("pass" if c.passed else "FAIL"),
        )
        for c in results
    ]
    payload = {"table": args.table, "seed": args.seed, "rhs": args.rhs, "cells": [c.to_dict() for c in results]}
    _emit(args.output, payload, TABLE_CSV, rows, out)
    return EXIT_OK if all(c.passed for c in results) else EXIT_NUMERIC


def cmd_analyze(args, out=None) -> int:
    out = out or sys.stdout
    sizes = _power_of_two_sizes(args.size, args.dim)
    f = _symbol(args, args.dim, args.q)
    zero = _zero(args, args.dim, args.q)
    h = build_hierarchy(
        f,
        zero,
        sizes,
        r=_r_value(args.r),
        omega_pre_scale=args.omega_pre_scale,
        omega_post_scale=args.omega_post_scale,
        projector_form=args.projector_form,
    )
    report = analysis.levelwise_delta(h, args.accounting)
    if args.measure:
        report.rho = analysis.measured_contraction(h, cap=args.cap)
    rows = [tuple(getattr(l, k) for k in THEORY_CSV) for l in report.levels]
    _emit(args.output, report.to_dict(), THEORY_CSV, rows, out)
    if args.output != "json":
        extra = f"delta_pre={report.delta_pre:.6g} delta_post={report.delta_post:.6g} bound={report.bound:.6g}"
        if report.rho is not None:
            extra += f" rho={report.rho:.6g}"
        out.write(extra + "\n")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "reproduce": cmd_reproduce, "analyze": cmd_analyze}


def main(argv=None) -> int:
    level = getattr(logging, os.environ.get("DCT3MG_LOG", "WARNING").upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"dct3mg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (Dct3mgError, ArithmeticError, ValueError) as exc:
        print(f"dct3mg: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
