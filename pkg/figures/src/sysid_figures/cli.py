"""Command-line entry point: ``sysid-figures render``."""

from __future__ import annotations

import argparse
import os
import sys

from .render import FIGURE_IDS, FigureJob, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sysid-figures",
        description="Render experiment-sweep CSVs as figure images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    rend = sub.add_parser("render", help="render one csv as one image")
    rend.add_argument("--csv", required=True, help="sweep csv written by the harness")
    rend.add_argument(
        "--figure", required=True, choices=FIGURE_IDS, help="figure family to draw"
    )
    rend.add_argument("--out", required=True, help="output image path (png)")
    return parser


def main(argv=None) -> int:
    try:
        return _dispatch(_build_parser().parse_args(argv))
    except BrokenPipeError:
        # The downstream reader (e.g. `head`) closed stdout early; that is
        # not our error.  Point stdout at /dev/null so the interpreter's
        # exit-time flush does not raise a second time.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


def _dispatch(args) -> int:
    try:
        job = FigureJob(csv_path=args.csv, figure_id=args.figure, output_path=args.out)
        out = render(job)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
