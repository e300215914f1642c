"""Command line front end: plotkit kappa|ser <csv> [-o <img>]."""

import argparse
import sys
from pathlib import Path

from .figures import FigureSpec, PlotkitError, render

_VERSION = "0.1.0"


def _default_output(csv_path, output):
    # figures land next to the delimited output unless redirected
    if output is not None:
        return output
    return Path(csv_path).with_suffix(".svg")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render figures from kappa.csv / ser.csv experiment outputs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    kappa = sub.add_parser("kappa", help="paired condition number histograms from kappa.csv")
    kappa.add_argument("csv", help="schema-valid kappa.csv")
    kappa.add_argument("-o", "--output", default=None,
                       help="image path; default is the CSV path with .svg suffix")
    kappa.add_argument("--bins", type=int, default=40, help="histogram bin count")

    ser = sub.add_parser("ser", help="error rate curves from ser.csv")
    ser.add_argument("csv", help="schema-valid ser.csv")
    ser.add_argument("-o", "--output", default=None,
                     help="image path; default is the CSV path with .svg suffix")
    ser.add_argument("--linear-y", action="store_true",
                     help="linear instead of logarithmic error rate axis")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.command == "kappa" and args.bins < 1:
        print(f"usage error: --bins must be positive, got {args.bins}", file=sys.stderr)
        return 2
    try:
        if args.command == "kappa":
            spec = FigureSpec(args.csv, "kappa-hist",
                              _default_output(args.csv, args.output), bins=args.bins)
        else:
            spec = FigureSpec(args.csv, "ser-curve",
                              _default_output(args.csv, args.output),
                              log_y=not args.linear_y)
        out = render(spec)
    except (PlotkitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
