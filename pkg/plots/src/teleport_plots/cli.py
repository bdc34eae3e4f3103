"""Command line for figure rendering.

Exit codes mirror the engine CLI: 0 success, 2 input/contract error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import __version__
from .figures import FIGURE_KINDS, FigureSpec, MissingColumnError, render

EXIT_OK = 0
EXIT_CONTRACT = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Draw standard figures from teleport CLI result tables.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--kind", choices=FIGURE_KINDS, required=True)
    parser.add_argument("--in", dest="input_csv", required=True, help="result CSV from the teleport CLI")
    parser.add_argument("--out", dest="output_image", required=True, help="image file to write")
    parser.add_argument(
        "--overlay",
        default=None,
        help="coordinate overlay JSON path (default: <out>.overlay.json)",
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(args.kind, args.input_csv, args.output_image, args.overlay)
    try:
        overlay = render(spec)
    except (OSError, MissingColumnError, ValueError) as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    print(f"wrote {spec.output_image} and {spec.overlay}")
    if overlay.get("crossing_nbar") is not None:
        print(f"fidelity crosses the threshold near nbar = {overlay['crossing_nbar']:.4f}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
