"""Command line interface: one subcommand per pipeline kind."""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, ToolkitError
from .harness import KINDS, ExperimentConfig, run_experiment

_HELP = {
    "rates": "tabulate merge rates for the configured measure",
    "simulate-coalescent": "sample partition-valued coalescent paths",
    "simulate-lookdown": "sample lookdown particle trajectories",
    "cdi": "coming-down-from-infinity verdicts by two routes",
    "modulus": "modulus-of-continuity envelope over dyadic windows",
    "dimension": "box-counting dimension of a support snapshot",
    "radius": "radius growth profile from the all-at-origin start",
    "range": "box-counting dimension of a time-window range union",
    "report": "summary report: CDI verdicts, T_m estimates, conditions",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lambda-fv-lab",
        description="Simulation and diagnostics for Lambda-coalescents and "
                    "lookdown-constructed Fleming-Viot supports.")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=_HELP[kind])
        p.add_argument("--config", required=True,
                       help="path to the JSON experiment config")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None,
                       help="override the config output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ExperimentConfig.from_file(args.config)
        config.kind = args.command
        if args.seed is not None:
            config.seed = args.seed
        if args.out is not None:
            config.output_dir = args.out
        manifest = run_experiment(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {manifest.path}")
    for name in sorted(manifest.files):
        print(f"  {name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
