"""
`bench` command line: run, gen-data, curves, report.

Exit codes: 0 on success, 2 for configuration errors, 1 for anything else.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src._version import __version__
from src.bench import (
    REPORT_FORMATS,
    curves_for_design,
    emit_report,
    generate_data,
    load_report,
    run_benchmark,
)
from src.config import load_config, resolve_output_dir
from src.errors import BenchError, ConfigurationError
from src.logs import get_logger

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    out = resolve_output_dir(config, args.out)
    log = get_logger(out, level=args.log_level)
    report = run_benchmark(config, out_dir=out, workers=args.workers)
    for fmt in REPORT_FORMATS:
        path = emit_report(report, out, fmt)
        log.info("wrote %s", path)
    failed = sum(1 for row in report.rows for c in row.cells if not c.ok)
    if failed:
        log.warning("%d cell(s) failed; see the error column in %s", failed, out / "report.json")
    return EXIT_OK


def _cmd_gen_data(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    out = resolve_output_dir(config, args.out)
    log = get_logger(out, level=args.log_level)
    paths = generate_data(config, out)
    log.info("wrote %d dataset files under %s", len(paths), out / "datasets")
    return EXIT_OK


def _cmd_curves(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    out = resolve_output_dir(config, args.out)
    log = get_logger(out, level=args.log_level)
    path, _ = curves_for_design(config, args.design, out, n_points=args.points)
    log.info("wrote %s", path)
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    out = Path(args.out)
    log = get_logger(level=args.log_level)
    try:
        report = load_report(out)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"no report.json under {out}; run `bench run` first") from exc
    log.info("wrote %s", emit_report(report, out, args.format))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench", description="Benchmark VQC designs on polynomial regression groups"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: INFO)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Train every cell and write report.{json,csv,md}")
    run.add_argument("--config", type=Path, required=True, help="Benchmark config (JSON)")
    run.add_argument("--workers", type=int, default=None, help="Parallel cells (default: config)")
    run.add_argument("--out", type=str, default=None, help="Output directory")
    run.set_defaults(func=_cmd_run)

    gen = sub.add_parser("gen-data", help="Write the dataset groups only")
    gen.add_argument("--config", type=Path, required=True, help="Benchmark config (JSON)")
    gen.add_argument("--out", type=str, default=None, help="Output directory")
    gen.set_defaults(func=_cmd_gen_data)

    curves = sub.add_parser("curves", help="Train one design on a 1-input G1 dataset, dump curves")
    curves.add_argument("--design", required=True, help="Design label from the config")
    curves.add_argument("--config", type=Path, required=True, help="Benchmark config (JSON)")
    curves.add_argument("--out", type=str, default=None, help="Output directory")
    curves.add_argument("--points", type=int, default=200, help="Curve points (default: 200)")
    curves.set_defaults(func=_cmd_curves)

    report = sub.add_parser("report", help="Re-emit a finished run's report")
    report.add_argument("--out", type=str, required=True, help="Directory holding report.json")
    report.add_argument("--format", choices=REPORT_FORMATS, default="md")
    report.set_defaults(func=_cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    args.log_level = getattr(logging, args.log_level)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print(f"Error: --workers must be >= 1, got {args.workers}", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "points", None) is not None and args.points < 2:
        print(f"Error: --points must be >= 2, got {args.points}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BenchError, OSError) as exc:
        print(f"Error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
