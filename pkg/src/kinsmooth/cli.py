"""Command-line entry point: ``kinsmooth run --config <file>`` or the flag form.

Exit status: 0 all checks pass, 1 a check failed, 2 usage or configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import SCENARIOS, ScenarioConfig
from .errors import ConfigurationError, DegenerateStateError, DomainTooSmallError, KinsmoothError

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _dt(value: str):
    if value == "auto":
        return value
    try:
        return float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"dt must be 'auto' or a number, got {value!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kinsmooth", description="Spectral smoothing experiments for kinetic equations.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario and write report.json, trace.csv and plots")
    run.add_argument("--config", help="JSON config file; flags override its entries")
    run.add_argument("--scenario", choices=SCENARIOS)
    run.add_argument("--dim", type=int)
    run.add_argument("--grid-n", type=int, dest="grid_n")
    run.add_argument("--half-width", type=float, dest="half_width")
    run.add_argument("--t-end", type=float, dest="t_end")
    run.add_argument("--dt", type=_dt)
    run.add_argument("--c0", type=float)
    run.add_argument("--delta", type=float)
    run.add_argument("--alpha", type=float)
    run.add_argument("--horizon", type=float, help="time horizon T in the c0 admissibility rule")
    run.add_argument("--initial-data", dest="initial_data")
    run.add_argument("--seed", type=int)
    run.add_argument("--output-dir", dest="output_dir")
    run.add_argument("--n-records", type=int, dest="n_records")
    run.add_argument("--tail-tol", type=float, dest="tail_tol")
    run.add_argument("--no-plots", action="store_false", dest="plots", default=None)
    run.add_argument("-q", "--quiet", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    cfg = ScenarioConfig.from_file(args.config) if args.config else ScenarioConfig()
    keys = ("scenario", "dim", "grid_n", "half_width", "t_end", "dt", "c0", "delta", "alpha", "horizon",
            "initial_data", "seed", "output_dir", "n_records", "tail_tol", "plots")
    return cfg.override(**{k: getattr(args, k) for k in keys})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    from .report import write_outputs
    from .scenarios import run

    try:
        cfg = config_from_args(args).resolved()
    except ConfigurationError as exc:
        print(f"kinsmooth: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run(cfg)
    except (ConfigurationError, DomainTooSmallError) as exc:
        print(f"kinsmooth: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (KinsmoothError, ArithmeticError, DegenerateStateError) as exc:
        print(f"kinsmooth: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    paths = write_outputs(report, cfg.output_dir, _csv_dim(cfg), plots=cfg.plots)
    if not args.quiet:
        for c in report.checks:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  value={c.value}  threshold={c.threshold}")
        print(json.dumps({"pass": report.passed, **{k: v for k, v in paths.items() if k != "plots"}}))
    return EXIT_OK if report.passed else EXIT_FAILED


def _csv_dim(cfg: ScenarioConfig) -> int:
    return cfg.dim if cfg.scenario != "lemma-verify" else 0


if __name__ == "__main__":
    sys.exit(main())
