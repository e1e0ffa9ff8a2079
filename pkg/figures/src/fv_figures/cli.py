"""Command line entry point: render one figure from a JSON spec."""

from __future__ import annotations

import argparse
import sys

from .errors import FigureError, SpecError
from .render import render
from .spec import FigureSpec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="make-figures",
        description="Render a figure from toolkit CSV outputs.")
    parser.add_argument("--spec", required=True,
                        help="path to the JSON figure spec")
    parser.add_argument("--out", default=".",
                        help="directory for relative output paths")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec.from_file(args.spec)
        target = render(spec, out_dir=args.out)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
