"""Command-line wrapper: `ordkl-render --kind <k> --in <files> --out <img>`."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .io import IoError, SchemaError
from .render import KINDS, FigureJob, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ordkl-render",
        description="Render figures from ordkl CSV/JSON output files.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--in", dest="inputs", required=True, nargs="+",
                   help="input CSV (and optional JSON envelope) files")
    p.add_argument("--out", dest="output", required=True,
                   help="output image path (png)")
    p.add_argument("--title", default="", help="optional figure title")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = FigureJob(kind=args.kind, inputs=tuple(args.inputs),
                        output=args.output, title=args.title)
        path = render(job)
    except (SchemaError, IoError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
