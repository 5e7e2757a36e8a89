"""Command line: plot <kind> <csv...> -o <path>."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render figures from heatchan result CSVs")
    parser.add_argument("kind", choices=list(FIGURE_KINDS))
    parser.add_argument("inputs", nargs="+", metavar="csv")
    parser.add_argument("-o", "--output", required=True,
                        help="image path (.png, .svg, or .pdf)")
    logx = parser.add_mutually_exclusive_group()
    logx.add_argument("--logx", dest="logx", action="store_true", default=None)
    logx.add_argument("--no-logx", dest="logx", action="store_false")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(inputs=tuple(args.inputs), kind=args.kind,
                          output=args.output, logx=args.logx, dpi=args.dpi)
        render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(args.output)
    return 0


def console_main() -> None:
    raise SystemExit(main(sys.argv[1:]))
