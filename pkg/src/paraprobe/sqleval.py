"""Paired execution-accuracy evaluation for NL2SQL predictions.

Predictions and gold SQL run against the benchmark's SQLite files, opened
read-only with a per-query timeout and row cap.  Result sets compare as
multisets unless the gold query carries ORDER BY, in which case row order
matters.  Any prediction, execution, or timeout error scores 0 for that
item and never aborts the run.
"""

from __future__ import annotations

import logging
import re
import sqlite3
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .clients import TextGenClient
from .errors import (
    PredictionError,
    SqlExecutionError,
    SqlTimeoutError,
    SqlTruncationError,
)
from .ingest import Benchmark, Example
from .ranking import RankedParaphrase

log = logging.getLogger(__name__)

REAL_ABS_TOL = 1e-6

_FENCED_BLOCK = re.compile(r"```(?:\w+)?\s*\n(.*?)```", re.DOTALL)
_ORDER_BY = re.compile(r"\border\s+by\b", re.IGNORECASE)


@dataclass(frozen=True)
class ExecLimits:
    timeout_s: float = 30.0
    row_cap: int = 100_000


@dataclass(frozen=True)
class ResultSet:
    columns: int
    rows: tuple[tuple, ...]


@dataclass(frozen=True)
class PairedEvalRecord:
    """Paired accuracy at one paraphrase rank; both sides share the subset."""

    model_id: str
    dataset: str
    rank: int
    n_pairs: int
    acc_orig: float
    acc_para: float
    delta: float


@dataclass(frozen=True)
class ItemOutcome:
    """Audit record for one scored prediction.

    ``rank`` is the paraphrase rank being evaluated; original-side records
    carry the same rank so every paired subset can be reconstructed from the
    log.
    """

    model_id: str
    example_id: str
    side: str  # "original" | "paraphrase"
    rank: int
    sql: str
    correct: bool
    error_class: str  # "" when execution succeeded


def nl2sql_prompt(question: str, context_turns: tuple[str, ...], schema_text: str) -> str:
    """Minimal inference prompt: schema, optional dialogue context, question."""
    template = (
        resources.files("paraprobe.assets")
        .joinpath("nl2sql_prompt.txt")
        .read_text(encoding="utf-8")
    )
    dialogue_block = ""
    if context_turns:
        dialogue_block = "Dialogue context:\n" + "\n".join(context_turns) + "\n\n"
    return (
        template.replace("{schema_definitions}", schema_text)
        .replace("{dialogue_block}", dialogue_block)
        .replace("{question}", question)
    )


def extract_sql(reply: str) -> str:
    """First fenced code block if present, else the full reply trimmed."""
    match = _FENCED_BLOCK.search(reply)
    sql = (match.group(1) if match else reply).strip()
    return sql


def predict_sql(
    question: str,
    context_turns: tuple[str, ...],
    schema_text: str,
    client: TextGenClient,
) -> str:
    """Ask the model for SQL; raise PredictionError on empty/failed replies."""
    prompt = nl2sql_prompt(question, context_turns, schema_text)
    try:
        reply = client.complete(prompt)
    except Exception as exc:
        raise PredictionError(f"prediction failed: {exc}") from exc
    sql = extract_sql(reply)
    if not sql:
        raise PredictionError("model returned an empty reply")
    return sql


def execute_sql(
    db_file: Path | str, sql: str, limits: ExecLimits = ExecLimits()
) -> ResultSet:
    """Run one read-only query and collect up to row_cap rows.

    Raises SqlExecutionError for syntax/semantic errors and write attempts,
    SqlTimeoutError past the per-query deadline, SqlTruncationError when the
    row cap is exceeded.
    """
    try:
        con = sqlite3.connect(f"file:{Path(db_file)}?mode=ro", uri=True)
    except sqlite3.Error as exc:
        raise SqlExecutionError(f"cannot open {db_file}: {exc}") from exc
    deadline = time.monotonic() + limits.timeout_s
    con.set_progress_handler(lambda: 1 if time.monotonic() > deadline else 0, 1000)
    try:
        con.execute("PRAGMA query_only = ON")
        con.text_factory = lambda data: data.decode("utf-8", "replace")
        cur = con.execute(sql)
        rows = cur.fetchmany(limits.row_cap + 1)
        if len(rows) > limits.row_cap:
            raise SqlTruncationError(f"result exceeds row cap {limits.row_cap}")
        columns = len(cur.description) if cur.description else 0
        return ResultSet(columns=columns, rows=tuple(tuple(r) for r in rows))
    except sqlite3.Error as exc:
        if time.monotonic() > deadline:
            raise SqlTimeoutError(f"query exceeded {limits.timeout_s}s") from exc
        raise SqlExecutionError(str(exc)) from exc
    finally:
        con.close()


def has_order_by(sql: str) -> bool:
    return bool(_ORDER_BY.search(sql))


def _sort_key(value):
    # stable cross-type ordering; numerics share one key space so that a
    # multiset compare can pair 6 with 6.0
    if value is None:
        return (0, "")
    if isinstance(value, bool):
        return (1, float(value))
    if isinstance(value, (int, float)):
        return (1, float(value))
    if isinstance(value, bytes):
        return (2, value.hex())
    return (3, str(value))


def _row_key(row):
    return tuple(_sort_key(v) for v in row)


def _values_equal(a, b) -> bool:
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        if isinstance(a, int) and isinstance(b, int):
            return a == b
        return abs(float(a) - float(b)) <= REAL_ABS_TOL
    return a == b


def _rows_equal(a: tuple, b: tuple) -> bool:
    return len(a) == len(b) and all(_values_equal(x, y) for x, y in zip(a, b))


def results_equivalent(
    gold: ResultSet, pred: ResultSet, gold_has_order_by: bool
) -> bool:
    """Compare result sets: ordered when the gold query sorts, multiset else.

    Column counts must match; comparison is column-order sensitive and
    column-name insensitive.  Text and integers compare exactly; reals with
    absolute tolerance 1e-6.
    """
    if gold.columns != pred.columns or len(gold.rows) != len(pred.rows):
        return False
    if gold_has_order_by:
        gold_rows, pred_rows = gold.rows, pred.rows
    else:
        gold_rows = sorted(gold.rows, key=_row_key)
        pred_rows = sorted(pred.rows, key=_row_key)
    return all(_rows_equal(g, p) for g, p in zip(gold_rows, pred_rows))


def usable_examples(benchmark: Benchmark, limits: ExecLimits = ExecLimits()) -> set[str]:
    """Ids of examples whose gold SQL executes cleanly on its own database.

    Execution accuracy is undefined without a gold result, so everything
    else is excluded from all accuracy denominators (and logged).
    """
    usable = set()
    for example in benchmark.examples:
        try:
            execute_sql(benchmark.db_file(example.db_id), example.gold_sql, limits)
            usable.add(example.id)
        except SqlExecutionError as exc:
            log.warning("%s: gold SQL failed (%s); example unusable", example.id, exc)
    return usable


@dataclass
class ModelEvalState:
    """Per-model caches shared across ranks.

    Original-question predictions and their scores are computed once per
    example; gold result sets once per example.  None in ``orig_predictions``
    records a prediction failure (still counted incorrect at every rank).
    """

    orig_predictions: dict[str, str | None] = field(default_factory=dict)
    orig_scores: dict[str, tuple[bool, str]] = field(default_factory=dict)
    gold_results: dict[str, ResultSet] = field(default_factory=dict)


def _gold_result(
    state: ModelEvalState, benchmark: Benchmark, example: Example, limits: ExecLimits
) -> ResultSet:
    if example.id not in state.gold_results:
        state.gold_results[example.id] = execute_sql(
            benchmark.db_file(example.db_id), example.gold_sql, limits
        )
    return state.gold_results[example.id]


def _score(
    benchmark: Benchmark,
    example: Example,
    predicted_sql: str | None,
    state: ModelEvalState,
    limits: ExecLimits,
) -> tuple[bool, str]:
    """Score one prediction; returns (correct, error_class)."""
    if predicted_sql is None:
        return False, "PredictionError"
    gold_result = _gold_result(state, benchmark, example, limits)
    try:
        pred_result = execute_sql(
            benchmark.db_file(example.db_id), predicted_sql, limits
        )
    except SqlExecutionError as exc:
        return False, type(exc).__name__
    correct = results_equivalent(
        gold_result, pred_result, gold_has_order_by=has_order_by(example.gold_sql)
    )
    return correct, ""


def _original_outcome(
    benchmark: Benchmark,
    example: Example,
    client: TextGenClient,
    state: ModelEvalState,
    limits: ExecLimits,
) -> tuple[str | None, bool, str]:
    if example.id not in state.orig_predictions:
        try:
            state.orig_predictions[example.id] = predict_sql(
                example.question, example.context_turns, example.schema_text, client
            )
        except PredictionError as exc:
            log.warning("%s: original prediction failed: %s", example.id, exc)
            state.orig_predictions[example.id] = None
    sql = state.orig_predictions[example.id]
    if example.id not in state.orig_scores:
        state.orig_scores[example.id] = _score(benchmark, example, sql, state, limits)
    ok, error_class = state.orig_scores[example.id]
    return sql, ok, error_class


def evaluate_rank(
    benchmark: Benchmark,
    paraphrases: dict[str, list[RankedParaphrase]],
    rank: int,
    client: TextGenClient,
    limits: ExecLimits = ExecLimits(),
    state: ModelEvalState | None = None,
    usable: set[str] | None = None,
) -> tuple[PairedEvalRecord | None, list[ItemOutcome]]:
    """Paired evaluation over the examples that retain a paraphrase at ``rank``.

    acc_orig and acc_para are computed over exactly the same example subset.
    Pass one ModelEvalState across ranks so original-question predictions
    are computed once per example.  Returns (None, []) with a logged notice
    when no example retains this rank.
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    if state is None:
        state = ModelEvalState()
    if usable is None:
        usable = usable_examples(benchmark, limits)
    subset: list[tuple[Example, RankedParaphrase]] = []
    for example in benchmark.examples:
        if example.id not in usable:
            continue
        retained_here = [
            p
            for p in paraphrases.get(example.id, [])
            if p.rank == rank and p.retained
        ]
        if retained_here:
            subset.append((example, retained_here[0]))
    if not subset:
        log.info(
            "%s/%s: no example retains rank %d; skipped",
            client.model_id,
            benchmark.release_tag,
            rank,
        )
        return None, []

    outcomes: list[ItemOutcome] = []
    correct_orig = correct_para = 0
    for example, paraphrase in subset:
        orig_sql, ok, error_class = _original_outcome(
            benchmark, example, client, state, limits
        )
        correct_orig += ok
        outcomes.append(
            ItemOutcome(
                model_id=client.model_id,
                example_id=example.id,
                side="original",
                rank=rank,
                sql=orig_sql or "",
                correct=ok,
                error_class=error_class,
            )
        )

        try:
            para_sql = predict_sql(
                paraphrase.text, example.context_turns, example.schema_text, client
            )
        except PredictionError as exc:
            log.warning("%s r%d: paraphrase prediction failed: %s", example.id, rank, exc)
            para_sql = None
        ok, error_class = _score(benchmark, example, para_sql, state, limits)
        correct_para += ok
        outcomes.append(
            ItemOutcome(
                model_id=client.model_id,
                example_id=example.id,
                side="paraphrase",
                rank=rank,
                sql=para_sql or "",
                correct=ok,
                error_class=error_class,
            )
        )

    n = len(subset)
    record = PairedEvalRecord(
        model_id=client.model_id,
        dataset=benchmark.release_tag,
        rank=rank,
        n_pairs=n,
        acc_orig=correct_orig / n,
        acc_para=correct_para / n,
        delta=correct_para / n - correct_orig / n,
    )
    return record, outcomes
