"""Shared command line core for the per-kind figure scripts."""

import argparse
import sys

from .figspec import FORMATS, INPUT_ARITY, FigureSpec, SchemaError, dry_run_text


def build_parser(prog: str, kind: str, summary: str) -> argparse.ArgumentParser:
    lo, hi = INPUT_ARITY[kind]
    files = "CSV file" if hi == 1 else f"{lo} to {hi} CSV files"
    parser = argparse.ArgumentParser(prog=prog, description=f"{summary} Reads {files}.")
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="CSV", help="input CSV path(s)")
    parser.add_argument("--out", default="", help="output image path (required unless --dry-run)")
    parser.add_argument("--format", default="png", choices=FORMATS, help="image format")
    parser.add_argument("--dry-run", action="store_true",
                        help="print the plotted columns verbatim instead of rendering")
    return parser


def run(kind: str, prog: str, summary: str, argv=None) -> int:
    args = build_parser(prog, kind, summary).parse_args(argv)
    try:
        spec = FigureSpec(kind=kind, inputs=tuple(args.inputs),
                          output=args.out, fmt=args.format)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.dry_run:
        sys.stdout.write(dry_run_text(spec))
        return 0
    if not args.out:
        print("error: --out is required unless --dry-run is given", file=sys.stderr)
        return 2
    from .render import render  # deferred: keeps --dry-run free of matplotlib

    render(spec)
    return 0
