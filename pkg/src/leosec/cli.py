"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 runtime / simulation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from . import __version__
from .config import ConfigError, Experiment, ScenarioConfig, TrainSettings, load_config
from .harness import Report, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

_SUBCOMMANDS = {
    "latency-table": Experiment.LATENCY_TABLE,
    "train": Experiment.TRAINING_CURVE,
    "rtt-scan": Experiment.RTT_SCAN,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="DIR", help="output directory (overrides output_dir)")
    p.add_argument("--seed", type=int, help="seed (overrides the config's seed)")
    p.add_argument("--quiet", action="store_true", help="print nothing on success")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leosec",
        description="LEO constellation latency engine and security-AI architecture simulator",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("latency-table", "inference latency table for the three architectures"),
        ("train", "centralized vs federated training curves and time-to-accuracy"),
        ("rtt-scan", "simulated satellite-to-ground RTTs over one orbital period"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="FILE", help="JSON scenario (experiment field is overridden)")
        _common(p)
    p = sub.add_parser("simulate", help="run whatever experiment the config names")
    p.add_argument("--config", metavar="FILE", required=True)
    _common(p)
    return parser


def _scenario(args: argparse.Namespace) -> ScenarioConfig:
    if args.command == "simulate":
        cfg = load_config(args.config)
    else:
        experiment = _SUBCOMMANDS[args.command]
        if args.config:
            cfg = replace(load_config(args.config), experiment=experiment)
        else:
            cfg = ScenarioConfig(experiment=experiment)
        if experiment is Experiment.TRAINING_CURVE and cfg.train is None:
            cfg = replace(cfg, train=TrainSettings())
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _print_report(report: Report) -> None:
    for path in report.files:
        print(path)
    print(json.dumps(report.stats, indent=2, sort_keys=True))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = _scenario(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_scenario(cfg)
    except Exception as exc:  # noqa: BLE001 - any failure maps to the runtime exit code
        print(f"simulation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if not args.quiet:
        _print_report(report)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
