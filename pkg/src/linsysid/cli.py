"""Command-line entry point.

``linsysid run <config.json>`` executes a sweep and reports the output path;
``linsysid validate <config.json>`` checks a config and prints per-point
bound diagnostics without simulating anything.
"""

from __future__ import annotations

import argparse
import os
import sys

from .harness import ExperimentConfig, run, validate


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linsysid",
        description="Run or validate experiment sweep configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runner = sub.add_parser("run", help="execute a sweep config and write its CSV")
    runner.add_argument("config", help="path to a JSON sweep config")
    runner.add_argument("--out", default=None, help="directory to resolve the output path against")
    runner.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    runner.add_argument(
        "--seed", type=int, default=None, help="override the config's master seed"
    )
    checker = sub.add_parser("validate", help="check a config and print bound diagnostics")
    checker.add_argument("config", help="path to a JSON sweep config")
    return parser


def main(argv=None) -> int:
    try:
        return _dispatch(build_parser().parse_args(argv))
    except BrokenPipeError:
        # The downstream reader (e.g. `head`) closed stdout early; that is
        # not our error.  Point stdout at /dev/null so the interpreter's
        # exit-time flush does not raise a second time.
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


def _dispatch(args) -> int:
    if args.command == "validate":
        try:
            lines = validate(args.config)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        for line in lines:
            print(line)
        return 0
    try:
        config = ExperimentConfig.from_json(args.config)
        summary = run(config, out_dir=args.out, threads=args.threads, master_seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {summary.rows_written} rows to {summary.output_path} "
        f"in {summary.wall_time_s:.1f}s ({summary.failed_cells} failed cells)"
    )
    # POSIX exit codes wrap at 256; cap so a large failure count stays nonzero.
    return min(summary.failed_cells, 255)


if __name__ == "__main__":
    raise SystemExit(main())
