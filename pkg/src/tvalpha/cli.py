"""Command-line interface: simulate, test, blocklen, and empirical.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
All randomness flows from explicit seeds, so repeated invocations with the
same arguments produce byte-identical CSV and JSON outputs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import yaml

from .blocklength import select_block_length
from .dgp import ExperimentPlan
from .empirical import PanelSource, ingest_and_balance, run_empirical
from .errors import ConfigError, TvalphaError
from .outcome import TEST_NAMES
from .sieve import fit_sieve
from .splines import SplineConfig, build_basis, build_design

logger = logging.getLogger("tvalpha")

USAGE_ERROR = 2
RUNTIME_ERROR = 1


def _add_spline_flags(parser):
    parser.add_argument("--spline-order", type=int, default=4, help="spline order q")
    parser.add_argument("--basis-dim", type=int, default=5, help="basis dimension L")


def _add_panel_flags(parser):
    parser.add_argument("returns_csv", help="wide CSV: date column + one column per asset")
    parser.add_argument("factors_csv", help="CSV with date, MKT, SMB, HML, RF columns")
    parser.add_argument("--date-format", default=None, help="explicit strptime date format")
    parser.add_argument(
        "--percent-units", action="store_true", help="factor file is in percent units"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvalpha",
        description="High-dimensional alpha tests for time-varying factor models",
    )
    parser.add_argument("--log-level", default="INFO", help="logging level")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo grid from a YAML config")
    sim.add_argument("config", help="YAML file with defaults and cells")
    sim.add_argument("-o", "--output-dir", default="mc-out", help="output directory")
    sim.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    sim.add_argument(
        "--calibration", choices=("adjusted", "plain"), default="adjusted"
    )

    test = sub.add_parser("test", help="run the six tests on a user panel")
    _add_panel_flags(test)
    _add_spline_flags(test)
    test.add_argument("--block-length", type=int, default=None)
    test.add_argument("--bandwidth", type=int, default=None)
    test.add_argument("--bootstrap-reps", type=int, default=500)
    test.add_argument("--seed", type=int, default=0)
    test.add_argument(
        "--tests", default=",".join(TEST_NAMES), help="comma-separated subset of tests"
    )
    test.add_argument(
        "--calibration", choices=("adjusted", "plain"), default="adjusted"
    )
    test.add_argument("-o", "--output", default=None, help="write the JSON report here")

    blk = sub.add_parser("blocklen", help="data-driven block-length report")
    _add_panel_flags(blk)
    _add_spline_flags(blk)

    emp = sub.add_parser("empirical", help="full pipeline with Box-Pierce diagnostics")
    _add_panel_flags(emp)
    _add_spline_flags(emp)
    emp.add_argument("--block-length", type=int, default=None)
    emp.add_argument("--bandwidth", type=int, default=None)
    emp.add_argument("--bootstrap-reps", type=int, default=500)
    emp.add_argument("--seed", type=int, default=0)
    emp.add_argument("--bp-lag", type=int, default=10)
    emp.add_argument(
        "--calibration", choices=("adjusted", "plain"), default="adjusted"
    )
    emp.add_argument("-o", "--output-dir", default="empirical-out")
    return parser


def _load_plans(path: str) -> list[ExperimentPlan]:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if not isinstance(raw, dict) or "cells" not in raw:
        raise ConfigError(f"{path}: expected a mapping with a 'cells' list")
    defaults = raw.get("defaults") or {}
    fmt = raw.get("format_version", 1)
    if fmt != 1:
        raise ConfigError(f"{path}: unsupported format_version {fmt}")
    plans = []
    for i, cell in enumerate(raw["cells"]):
        merged = {**defaults, **(cell or {})}
        try:
            plans.append(ExperimentPlan.from_dict(merged))
        except (ConfigError, TypeError, KeyError) as exc:
            raise ConfigError(f"{path}: cell {i}: {exc}") from None
    return plans


def _spline_config(args) -> SplineConfig:
    return SplineConfig.from_basis_dim(args.basis_dim, args.spline_order)


def _print_report_table(report: dict, stream=sys.stdout):
    print(f"T={report['T']} N={report['N']} block_length={report['block_length']}"
          f" bandwidth={report['bandwidth']}", file=stream)
    print(f"{'test':6s} {'statistic':>14s} {'p-value':>12s}  calibration", file=stream)
    for name in TEST_NAMES:
        if name in report["tests"]:
            entry = report["tests"][name]
            print(
                f"{name:6s} {entry['statistic']:14.6g} {entry['p_value']:12.6g}"
                f"  {entry['calibration']}",
                file=stream,
            )


def cmd_simulate(args) -> int:
    from .montecarlo import run_grid

    plans = _load_plans(args.config)
    table = run_grid(
        plans, args.output_dir, n_jobs=args.jobs, calibration=args.calibration
    )
    logger.info("wrote %d cells to %s", len(table), args.output_dir)
    return 0


def cmd_test(args) -> int:
    wanted = tuple(t.strip().upper() for t in args.tests.split(",") if t.strip())
    unknown = set(wanted) - set(TEST_NAMES)
    if unknown:
        raise ConfigError(f"unknown tests: {sorted(unknown)}")
    src = PanelSource(
        returns_csv=args.returns_csv,
        factors_csv=args.factors_csv,
        date_format=args.date_format,
        percent_units=args.percent_units,
    )
    report = run_empirical(
        src,
        spline=_spline_config(args),
        block_length=args.block_length,
        bandwidth=args.bandwidth,
        bootstrap_reps=args.bootstrap_reps,
        seed=args.seed,
        calibration=args.calibration,
        tests=wanted,
    )
    report["tests"] = {k: v for k, v in report["tests"].items() if k in wanted}
    _print_report_table(report)
    if args.output:
        Path(args.output).write_text(json.dumps(report, sort_keys=True, indent=1))
        logger.info("wrote %s", args.output)
    return 0


def cmd_blocklen(args) -> int:
    src = PanelSource(
        returns_csv=args.returns_csv,
        factors_csv=args.factors_csv,
        date_format=args.date_format,
        percent_units=args.percent_units,
    )
    panel, factors = ingest_and_balance(src)
    basis = build_basis(panel.T, _spline_config(args))
    fit = fit_sieve(panel, build_design(basis, factors))
    centered = fit.residuals - fit.residuals.mean(axis=0)
    report = select_block_length(centered).as_dict()
    report["format_version"] = 1
    print(json.dumps(report, sort_keys=True, indent=1))
    return 0


def cmd_empirical(args) -> int:
    src = PanelSource(
        returns_csv=args.returns_csv,
        factors_csv=args.factors_csv,
        date_format=args.date_format,
        percent_units=args.percent_units,
    )
    report = run_empirical(
        src,
        spline=_spline_config(args),
        block_length=args.block_length,
        bandwidth=args.bandwidth,
        bootstrap_reps=args.bootstrap_reps,
        seed=args.seed,
        bp_lag=args.bp_lag,
        calibration=args.calibration,
    )
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, sort_keys=True, indent=1))
    bp = report["box_pierce"]["p_values"]
    lines = ["asset,box_pierce_p"] + [f"{k},{v!r}" for k, v in bp.items()]
    (out / "box_pierce.csv").write_text("\n".join(lines) + "\n")
    _print_report_table(report)
    logger.info("wrote report.json and box_pierce.csv to %s", out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    handlers = {
        "simulate": cmd_simulate,
        "test": cmd_test,
        "blocklen": cmd_blocklen,
        "empirical": cmd_empirical,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except TvalphaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
