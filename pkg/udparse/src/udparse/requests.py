"""Reading line-delimited JSON parse-request files.

Two row shapes are accepted and may be mixed:

- ``{"id": "<sent_id>", "text": "<sentence>"}`` — one sentence per row,
  the shape the paraphrase pipeline emits in ``parse_requests.jsonl``;
- ``{"example_id": "<id>", "sentences": ["<original>", "<candidate>", ...]}``
  — a grouped row; the original becomes sent_id ``<id>`` and candidate
  ``j`` becomes ``<id>#p<j>`` (1-based), preserving list order.

A row whose only key is ``meta`` (the pipeline's artifact header) is
skipped.  Blank lines are ignored.  Malformed rows, duplicate sentence
ids, and files with no sentences raise RequestError.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import RequestError


def _grouped_rows(row: dict, lineno: int) -> list[tuple[str, str]]:
    example_id = row["example_id"]
    sentences = row.get("sentences")
    if not isinstance(example_id, str) or not example_id.strip():
        raise RequestError(f"line {lineno}: example_id must be a non-empty string")
    if not isinstance(sentences, list) or not sentences:
        raise RequestError(f"line {lineno}: sentences must be a non-empty array")
    if not all(isinstance(s, str) for s in sentences):
        raise RequestError(f"line {lineno}: sentences must all be strings")
    rows = [(example_id, sentences[0])]
    rows += [(f"{example_id}#p{j}", s) for j, s in enumerate(sentences[1:], start=1)]
    return rows


def read_requests(path: Path | str) -> list[tuple[str, str]]:
    """(sent_id, text) pairs from a request file, in file order."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise RequestError(f"cannot read request file {path}: {exc}") from exc

    rows: list[tuple[str, str]] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RequestError(f"line {lineno}: invalid JSON: {exc}") from exc
        if not isinstance(row, dict):
            raise RequestError(f"line {lineno}: expected a JSON object")
        if set(row) == {"meta"}:
            continue
        if "example_id" in row:
            rows.extend(_grouped_rows(row, lineno))
        elif "id" in row and "text" in row:
            if not isinstance(row["id"], str) or not row["id"].strip():
                raise RequestError(f"line {lineno}: id must be a non-empty string")
            if not isinstance(row["text"], str):
                raise RequestError(f"line {lineno}: text must be a string")
            rows.append((row["id"], row["text"]))
        else:
            raise RequestError(
                f"line {lineno}: expected keys id/text or example_id/sentences"
            )

    if not rows:
        raise RequestError(f"request file {path} contains no sentences")
    seen: set[str] = set()
    for sent_id, _ in rows:
        if sent_id in seen:
            raise RequestError(f"duplicate sentence id {sent_id!r} in request file")
        seen.add(sent_id)
    return rows
