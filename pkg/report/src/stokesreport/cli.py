"""CLI: render an experiment output directory into figures and an index."""

from __future__ import annotations

import argparse
import sys

from .reader import SchemaError
from .render import ALL_FIGURES, ReportSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="stokes-report")
    parser.add_argument("--input", required=True, help="directory of record subdirs")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--figures", nargs="*", default=list(ALL_FIGURES),
                        choices=ALL_FIGURES, help="figures to render")
    args = parser.parse_args(argv)
    try:
        index = render(ReportSpec(input_dir=args.input, output_dir=args.out,
                                  figures=tuple(args.figures)))
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return 1
    print(index)
    return 0


if __name__ == "__main__":
    sys.exit(main())
