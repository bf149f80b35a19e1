"""Command line interface: parse a request file into CoNLL-U."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import UdparseError
from .models import DEFAULT_MODEL, PINNED_MODELS, load_model
from .parser import parse_to_conllu
from .requests import read_requests


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="udparse",
        description="Dependency-parse question text into CoNLL-U",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("parse", help="parse a line-delimited JSON request file")
    p.add_argument("--in", dest="infile", required=True,
                   help="request file (line-delimited JSON)")
    p.add_argument("--out", dest="outfile", required=True,
                   help="CoNLL-U output file (UTF-8)")
    p.add_argument("--model", default=DEFAULT_MODEL,
                   help=f"pinned parser model (default {DEFAULT_MODEL}; "
                        f"available: {', '.join(sorted(PINNED_MODELS))})")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        model = load_model(args.model)
        rows = read_requests(args.infile)
        result = parse_to_conllu(rows, model)
        Path(args.outfile).write_text(result.text, encoding="utf-8")
    except UdparseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: cannot write {args.outfile}: {exc}", file=sys.stderr)
        return 1
    parsed = result.sentences - result.failed
    print(
        f"parsed {parsed}/{result.sentences} sentences with "
        f"{model.provenance} -> {args.outfile}"
    )
    if result.failed:
        print(f"warning: {result.failed} sentence(s) emitted as error blocks",
              file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
