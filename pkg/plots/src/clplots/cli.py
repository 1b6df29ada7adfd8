"""Command-line renderer for experiment output files.

Usage:

    clplots render --kind trajectory|rates|forgetting-regret \
        --in <csv> --out <image> [--summary <summary.json>]

Exit codes: 0 success, 2 malformed input or arguments.
"""

import argparse
import sys

from .io import SchemaError
from .render import KINDS, render

EXIT_OK = 0
EXIT_INPUT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clplots",
                                     description="render experiment CSV outputs")
    sub = parser.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("render", help="render one figure from a CSV file")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--in", dest="in_csv", required=True, help="input CSV path")
    p.add_argument("--out", dest="out_path", required=True, help="output image path")
    p.add_argument("--summary", default=None,
                   help="summary.json with target/meta overlays (trajectory only)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(args.kind, args.in_csv, args.out_path, summary_path=args.summary)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    print(f"wrote {args.out_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
