"""``simulate`` command line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, apply_settings, load_config_file, parse_override
from .scenarios import SCENARIOS, get_scenario, run_scenario

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="simulate",
        description="Simulate recommender agents with different knowledge of a user's "
        "preferences and irrationalities, writing CSV and SVG results.",
    )
    p.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    p.add_argument("--config", help="flat key: value (YAML) configuration file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a configuration key; repeatable")
    p.add_argument("--seed", type=int, help="master seed (same as --set master_seed=N)")
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    p.add_argument("--ci-scale", action="store_true",
                   help="20 users, 200 videos/day, 200 particles, 30 days")
    p.add_argument("--threads", type=int, default=1, help="worker processes; 0 = all CPUs")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.threads < 0:
            raise UsageError(f"--threads must be >= 0, got {args.threads}")
        scenario = get_scenario(args.scenario)
        cfg = scenario.config(ci_scale=args.ci_scale)
        if args.config:
            cfg = apply_settings(cfg, load_config_file(args.config))
        overrides = dict(parse_override(o) for o in args.overrides)
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        cfg = apply_settings(cfg, overrides)
    except (UsageError, ConfigError, ValueError) as exc:
        print(f"simulate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"simulate: error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        csv_path, svg_path = run_scenario(scenario, args.out, cfg, workers=args.threads)
    except OSError as exc:
        print(f"simulate: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(csv_path)
    print(svg_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
