"""Command line interface for the paraphrase-sensitivity pipeline.

Each stage subcommand runs the pipeline up to and including that stage
(earlier stages resume from cache), `run` executes everything, `sweep`
executes several configs in sequence, and `calibrate` prints a cosine
histogram for picking the filter threshold.  Exit code is 0 only when no
stage-level fatal error occurred.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .errors import ParaprobeError
from .pipeline import Pipeline, RunResult

log = logging.getLogger(__name__)

_STAGE_COMMANDS = {
    "ingest": "ingest",
    "paraphrase": "paraphrase",
    "parse-import": "parse_import",
    "rank": "rank",
    "filter": "filter",
    "evaluate": "evaluate",
    "stats": "stats",
    "report": "report",
    "run": "report",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paraprobe",
        description="Paraphrase-rank sensitivity analysis for NL2SQL benchmarks",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("ingest", "paraphrase", "parse-import", "rank", "filter",
                 "evaluate", "stats", "report", "run"):
        p = sub.add_parser(name, help=f"run the pipeline through the {name} stage"
                           if name != "run" else "run every stage")
        p.add_argument("-c", "--config", required=True, help="run config YAML")

    p = sub.add_parser("calibrate",
                       help="print a cosine histogram for threshold selection")
    p.add_argument("-c", "--config", required=True, help="run config YAML")
    p.add_argument("--sample-size", type=int, default=100,
                   help="number of examples to sample (default 100)")

    p = sub.add_parser("sweep", help="run several configs in sequence")
    p.add_argument("configs", nargs="+", help="run config YAML files")
    return parser


def _report_result(result: RunResult) -> int:
    for message in result.errors:
        print(f"warning: {message}", file=sys.stderr)
    if result.fatal:
        print(f"fatal: {result.fatal_reason}", file=sys.stderr)
        print(f"completed stages: {', '.join(result.completed_stages) or 'none'}",
              file=sys.stderr)
        return 1
    print(f"ok: {', '.join(result.completed_stages)} -> {result.out_dir}")
    return 0


def _run_stage(config_path: str, until: str) -> int:
    try:
        config = load_config(config_path)
    except ParaprobeError as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 1
    return _report_result(Pipeline(config).run(until=until))


def _run_calibrate(config_path: str, sample_size: int) -> int:
    try:
        config = load_config(config_path)
        rows = Pipeline(config).calibrate(sample_size)
    except ParaprobeError as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 1
    total = sum(n for _, _, n in rows)
    print("cosine      count")
    for lo, hi, n in rows:
        if n:
            print(f"[{lo:+.1f},{hi:+.1f})  {n}")
    print(f"total pairs: {total}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "calibrate":
        return _run_calibrate(args.config, args.sample_size)
    if args.command == "sweep":
        status = 0
        for config_path in args.configs:
            print(f"== {config_path} ==")
            status = max(status, _run_stage(config_path, "report"))
        return status
    return _run_stage(args.config, _STAGE_COMMANDS[args.command])


if __name__ == "__main__":
    sys.exit(main())
