"""Command line entry point.

::

    vabo run CONFIG [--out DIR] [--jobs K]
    vabo validate CONFIG
    vabo list-problems

Exit codes: 0 success, 1 runtime failure, 2 config error. The output
directory defaults to the config's ``output`` key, then ``$VABO_OUTPUT_DIR``,
then ``./vabo-output``.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .campaign import run_campaign
from .config import validate_config
from .exceptions import ConfigError
from .problems import list_problems

OUTPUT_ENV = "VABO_OUTPUT_DIR"
DEFAULT_OUTPUT = "vabo-output"


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return validate_config(text)


def _report(exc):
    print("config error:", file=sys.stderr)
    for err in exc.errors:
        print(f"  - {err}", file=sys.stderr)


def build_parser():
    parser = argparse.ArgumentParser(prog="vabo", description="Violation-aware Bayesian optimization campaigns")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a campaign")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_val = sub.add_parser("validate", help="check a config file")
    p_val.add_argument("config")
    sub.add_parser("list-problems", help="list built-in problems")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "list-problems":
        for name, desc in list_problems().items():
            print(f"{name}\t{desc}")
        return 0

    try:
        config = _load(args.config)
    except ConfigError as exc:
        _report(exc)
        return 2

    if args.command == "validate":
        print(f"{args.config}: ok")
        return 0

    if args.jobs < 1:
        print("--jobs must be >= 1", file=sys.stderr)
        return 2
    out = args.out or config.output or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT
    try:
        code = run_campaign(config, out, jobs=args.jobs)
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote results to {out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
