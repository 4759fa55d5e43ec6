"""Command line: plots <csv>... --labels a,b,c --slopes 4 --output fig.svg"""

from __future__ import annotations

import argparse
import sys

from .figure import FigureSpec, render
from .reader import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render converge CSV reports as a log-log figure")
    parser.add_argument("csvs", nargs="+", help="converge CSV files")
    parser.add_argument("--labels", required=True,
                        help="comma-separated series labels, one per CSV")
    parser.add_argument("--slopes", default="",
                        help="comma-separated reference slopes to draw")
    parser.add_argument("--output", required=True, help="PNG or SVG path")
    parser.add_argument("--region", action="store_true",
                        help="treat inputs as stability-region CSVs and "
                             "scatter them instead")
    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        if args.region:
            from .region import render_region

            render_region(args.csvs, args.output)
            return 0
        labels = tuple(part for part in args.labels.split(",") if part)
        slopes = tuple(int(s) for s in args.slopes.split(",") if s)
        spec = FigureSpec(tuple(args.csvs), labels, slopes, args.output)
        fitted = render(spec)
        for label, slope in fitted.items():
            print(f"{label}: slope {slope:.2f}")
        return 0
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))
