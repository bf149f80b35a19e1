"""Load NL2SQL benchmark dev sets and render schema context for prompting.

Supported layouts (all read unmodified from the published distributions):

* spider: ``dev.json`` records with ``db_id``/``question``/``query``,
  SQLite files under ``database/<db_id>/<db_id>.sqlite``.
* bird:   ``dev.json`` records with ``db_id``/``question``/``SQL`` and an
  optional ``evidence`` string, databases under ``dev_databases/``.
* sparc / cosql: ``dev.json`` dialogues with an ``interaction`` turn list;
  the final user turn becomes the question, earlier turns the context.
"""

from __future__ import annotations

import json
import logging
import sqlite3
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IngestError, SchemaError

log = logging.getLogger(__name__)

FORMATS = ("spider", "bird", "sparc", "cosql")
_DB_DIR_CANDIDATES = ("database", "dev_databases", "databases")


@dataclass(frozen=True)
class Example:
    """One evaluable benchmark item (single question or dialogue final turn)."""

    id: str
    db_id: str
    question: str
    context_turns: tuple[str, ...]
    gold_sql: str
    schema_text: str


@dataclass(frozen=True)
class SchemaText:
    db_id: str
    rendered: str


@dataclass
class Benchmark:
    name: str
    release_tag: str
    examples: list[Example]
    db_root: Path
    skipped: list[str] = field(default_factory=list)  # dropped example ids/reasons

    def db_file(self, db_id: str) -> Path:
        return self.db_root / db_id / f"{db_id}.sqlite"


def render_schema(db_file: Path | str, include_sample_rows: int = 3) -> SchemaText:
    """Render CREATE TABLE statements plus up to N sample rows per table.

    Deterministic for a fixed database file: tables are emitted in name
    order and sample rows in storage (rowid) order.
    """
    db_file = Path(db_file)
    db_id = db_file.stem
    if not db_file.is_file():
        raise SchemaError(f"database file not found: {db_file} (db_id={db_id})")
    try:
        con = sqlite3.connect(f"file:{db_file}?mode=ro", uri=True)
        try:
            con.text_factory = lambda data: data.decode("utf-8", "replace")
            tables = con.execute(
                "SELECT name, sql FROM sqlite_master "
                "WHERE type='table' AND name NOT LIKE 'sqlite_%' ORDER BY name"
            ).fetchall()
            blocks = []
            for name, create_sql in tables:
                block = (create_sql or f"CREATE TABLE {name} (...)").strip()
                if include_sample_rows > 0:
                    rows, headers = _sample_rows(con, name, include_sample_rows)
                    lines = [f"{len(rows)} rows from {name} table:"]
                    lines.append("\t".join(headers))
                    for row in rows:
                        lines.append("\t".join(_render_value(v) for v in row))
                    block += "\n/*\n" + "\n".join(lines) + "\n*/"
                blocks.append(block)
            rendered = "\n\n".join(blocks)
        finally:
            con.close()
    except sqlite3.Error as exc:
        raise SchemaError(f"cannot render schema for {db_id}: {exc}") from exc
    return SchemaText(db_id=db_id, rendered=rendered)


def _sample_rows(con: sqlite3.Connection, table: str, limit: int):
    quoted = table.replace('"', '""')
    cur = con.execute(f'SELECT * FROM "{quoted}" LIMIT {int(limit)}')
    headers = [d[0] for d in cur.description]
    return cur.fetchall(), headers


def _render_value(value) -> str:
    if value is None:
        return "None"
    if isinstance(value, bytes):
        return value.hex()
    return str(value)


def load_benchmark(path: Path | str, format: str) -> Benchmark:
    """Load a dev split into one Example per evaluable question.

    Examples referencing a missing database file are skipped and logged.
    Multi-turn dialogues yield one Example whose question is the final user
    turn and whose context_turns are all preceding turns, in order.
    """
    if format not in FORMATS:
        raise IngestError(f"unknown benchmark format {format!r}")
    root = Path(path)
    dev_file = root / "dev.json"
    if not dev_file.is_file():
        raise IngestError(f"missing dev-set file: {dev_file}")
    try:
        raw = json.loads(dev_file.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestError(f"cannot read {dev_file}: {exc}") from exc
    if not isinstance(raw, list):
        raise IngestError(f"{dev_file} must contain a JSON array")

    db_root = _find_db_root(root)
    benchmark = Benchmark(
        name=format,
        release_tag=f"{format}-dev",
        examples=[],
        db_root=db_root,
    )
    schema_cache: dict[str, SchemaText] = {}
    for idx, record in enumerate(raw):
        example_id = f"{format}-{idx:04d}"
        try:
            fields = _extract_fields(record, format)
        except (KeyError, TypeError, IndexError) as exc:
            benchmark.skipped.append(example_id)
            log.warning("%s: malformed record skipped (%s)", example_id, exc)
            continue
        db_id, question, context_turns, gold_sql, evidence = fields
        if not question or not gold_sql:
            benchmark.skipped.append(example_id)
            log.warning("%s: empty question or gold SQL; skipped", example_id)
            continue
        db_file = db_root / db_id / f"{db_id}.sqlite"
        if not db_file.is_file():
            benchmark.skipped.append(example_id)
            log.warning("%s: missing database %s; skipped", example_id, db_file)
            continue
        if db_id not in schema_cache:
            schema_cache[db_id] = render_schema(db_file)
        schema_text = schema_cache[db_id].rendered
        if evidence:
            schema_text += f"\n\nEvidence:\n{evidence}"
        benchmark.examples.append(
            Example(
                id=example_id,
                db_id=db_id,
                question=question,
                context_turns=tuple(context_turns),
                gold_sql=gold_sql,
                schema_text=schema_text,
            )
        )
    return benchmark


def _find_db_root(root: Path) -> Path:
    for candidate in _DB_DIR_CANDIDATES:
        if (root / candidate).is_dir():
            return root / candidate
    raise IngestError(f"no database directory under {root} (tried {_DB_DIR_CANDIDATES})")


def _extract_fields(record: dict, format: str):
    """Return (db_id, question, context_turns, gold_sql, evidence)."""
    if format == "spider":
        return (
            record["db_id"],
            record["question"].strip(),
            [],
            record["query"].strip(),
            "",
        )
    if format == "bird":
        # BIRD carries a per-question "evidence" hint and a "difficulty"
        # label; difficulty is ingested but unused.
        return (
            record["db_id"],
            record["question"].strip(),
            [],
            record["SQL"].strip(),
            str(record.get("evidence", "")).strip(),
        )
    # sparc / cosql dialogues
    db_id = record.get("database_id") or record["db_id"]
    turns = [t for t in record["interaction"] if t.get("utterance", "").strip()]
    if not turns:
        final = record.get("final")
        if not final:
            raise KeyError("dialogue has no turns")
        return db_id, final["utterance"].strip(), [], final["query"].strip(), ""
    last = turns[-1]
    context = [t["utterance"].strip() for t in turns[:-1]]
    return db_id, last["utterance"].strip(), context, last["query"].strip(), ""
