"""Command-line front end.

`twotier run` executes the seeded multi-repetition comparison of the
optimizers and writes results.csv / summary.csv / best.txt (plus a
timings.csv sidecar); `twotier summarize` recomputes summary.csv from an
existing results.csv.  Flags override config-file values.
"""

import argparse
import sys

from .config import ConfigError, parse_config
from .runner import run_campaign, summarize


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twotier",
        description="Two-tier hyper-parameter optimization for tabular RL agents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run optimizer comparison campaigns")
    run_p.add_argument("--config", metavar="FILE", help="key = value campaign configuration")
    run_p.add_argument(
        "--optimizers",
        metavar="NAMES",
        help="comma-separated subset of: two_tier,random,mono_bo",
    )
    run_p.add_argument("--seed", type=int, metavar="S", help="base seed (campaign r uses S + r)")
    run_p.add_argument("--reps", type=int, metavar="R", help="number of repetitions per optimizer")
    run_p.add_argument("--out", metavar="DIR", help="output directory")
    run_p.add_argument(
        "--rs-fix-structural",
        action="store_true",
        default=None,
        help="random search keeps the default structural configuration",
    )
    run_p.add_argument("--workers", type=int, metavar="W", help="parallel campaign processes")
    run_p.add_argument(
        "--t-interval",
        action="store_true",
        default=None,
        help="Student-t confidence intervals instead of the normal 1.96",
    )

    sum_p = sub.add_parser("summarize", help="recompute summary.csv from results.csv")
    sum_p.add_argument("--in", dest="in_path", required=True, metavar="FILE")
    sum_p.add_argument("--out", dest="out_path", required=True, metavar="FILE")
    sum_p.add_argument("--t-interval", action="store_true", help="Student-t intervals")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        overrides = {
            "optimizers": args.optimizers,
            "base_seed": args.seed,
            "repetitions": args.reps,
            "out_dir": args.out,
            "rs_fix_structural": args.rs_fix_structural,
            "workers": args.workers,
            "t_interval": args.t_interval,
        }
        try:
            config = parse_config(args.config, overrides)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return run_campaign(config)
    try:
        summarize(args.in_path, args.out_path, t_interval=args.t_interval)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
