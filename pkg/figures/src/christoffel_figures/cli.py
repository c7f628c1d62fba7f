"""Command line entry points: render-fan, render-cd, render-errors.

Each command reads study CSVs, writes one PNG, and exits 0; any contract
violation (missing file, wrong header, ragged or non-numeric data, bad
bound parameters) prints a message to stderr and exits 1.
"""

from __future__ import annotations

import argparse
import sys

from .plotdata import SchemaError, load_error_curves, load_fan, load_levelsets
from .render import render_cd, render_errors, render_fan


def _run(fn) -> int:
    try:
        fn()
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main_fan(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-fan",
        description="Render a suboptimality fan from a refinement CSV.",
    )
    parser.add_argument("csv", help="quantile or per-repetition trajectory CSV")
    parser.add_argument("out", help="output PNG path")
    parser.add_argument(
        "--bound",
        nargs=2,
        type=float,
        metavar=("D", "P"),
        help="draw the reference bound for dimension D at probability P "
        "(both reported in the study manifest)",
    )
    args = parser.parse_args(argv)

    def job():
        bound = None
        if args.bound is not None:
            d = int(args.bound[0])
            if d != args.bound[0]:
                raise SchemaError("bound dimension D must be an integer")
            bound = (d, args.bound[1])
        render_fan(load_fan(args.csv), args.out, bound=bound)

    return _run(job)


def main_cd(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-cd",
        description="Render level sets with target/approximation overlays.",
    )
    parser.add_argument("matrix_csv", help="dense level-set matrix CSV")
    parser.add_argument("overlay_csv", help="x,f_true,<fits...> overlay CSV")
    parser.add_argument("out", help="output PNG path")
    args = parser.parse_args(argv)
    return _run(lambda: render_cd(load_levelsets(args.matrix_csv, args.overlay_csv), args.out))


def main_errors(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render-errors",
        description="Render reweighting-study error curves.",
    )
    parser.add_argument("csv", help="target,n,rep,method,rel_error table CSV")
    parser.add_argument("out", help="output PNG path")
    args = parser.parse_args(argv)
    return _run(lambda: render_errors(load_error_curves(args.csv), args.out))
