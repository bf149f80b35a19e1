"""Acceptance criteria for the toolkit, one printed PASS/FAIL line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines; every
criterion is also an ordinary assertion, so the suite fails loudly when a
contract is broken.  Golden values marked "oracle-verified" were computed
with the independent brute-force implementations in ``oracles.py`` before
being frozen here.
"""

from __future__ import annotations

import json
import random
import re
import time
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from paraprobe.config import load_config
from paraprobe.ingest import Example
from paraprobe.paraphrase import GenConfig, build_prompt, prompt_template
from paraprobe.pipeline import STAGE_ORDER, Pipeline
from paraprobe.semfilter import jaccard
from paraprobe.sqleval import (
    ExecLimits,
    SqlExecutionError,
    execute_sql,
    has_order_by,
    results_equivalent,
)
from paraprobe.stats import bootstrap_ci, kendall_tau, tau_report
from paraprobe.ted import ted

from helpers import QUESTION_A, QUESTION_B, random_dep_tree, worked_example_trees
from oracles import tau_bruteforce, ted_bruteforce, ted_bruteforce_script

DATA = Path(__file__).parent / "data"


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'} ({detail})", flush=True)
    assert ok, f"{name}: {detail}"


# -- tree edit distance -----------------------------------------------------------


def test_ted_matches_bruteforce_oracle():
    rng = random.Random(93)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        a = random_dep_tree(rng, max_nodes=8, alphabet=4)
        b = random_dep_tree(rng, max_nodes=8, alphabet=4)
        if ted(a, b) != ted_bruteforce(a, b):
            mismatches += 1
    elapsed = time.perf_counter() - start
    _report(
        "ted-oracle-equivalence",
        mismatches == 0 and elapsed < 10.0,
        f"200 random pairs, {mismatches} mismatches, {elapsed:.2f}s",
    )


def test_worked_example_distance():
    # "How many singers do we have?" vs "How many singers are recorded in
    # the database?" — ted = 5, oracle-verified.  The cheapest edit script
    # is 3 substitutions + 2 insertions (size difference 9 - 7 = 2 forces
    # insertions - deletions = 2, so no script with 3 insertions and no
    # deletions can cost 5).
    a, b = worked_example_trees()
    distance = ted(a, b)
    script = ted_bruteforce_script(a, b)
    _report(
        "worked-example-ted",
        distance == 5 and script == (5, 3, 0, 2),
        f"ted={distance}, optimal script {script[1]} sub + {script[2]} del + {script[3]} ins",
    )


# -- rank statistics ---------------------------------------------------------------


def test_tau_matches_bruteforce_oracle():
    rng = random.Random(417)
    grid = [-0.4, -0.2, -0.1, 0.0, 0.1, 0.2]  # coarse values force ties
    mismatches = 0
    for _ in range(500):
        n = rng.randint(2, 50)
        points = [(rng.randint(1, 10), rng.choice(grid)) for _ in range(n)]
        if kendall_tau(points).tau != tau_bruteforce(points):
            mismatches += 1
    increasing = kendall_tau([(r, r / 10) for r in range(1, 21)]).tau
    decreasing = kendall_tau([(r, -r / 10) for r in range(1, 21)]).tau
    _report(
        "tau-oracle-equivalence",
        mismatches == 0 and increasing == 1.0 and decreasing == -1.0,
        f"500 random sets, {mismatches} mismatches; monotone inputs give ±1 exactly",
    )


def test_bootstrap_contract():
    points = [(rank, float(-rank)) for rank in range(1, 11)]
    lo, hi, resamples = bootstrap_ci(points, B=100, seed=13)
    again = bootstrap_ci(points, B=100, seed=13)
    percentiles = np.percentile(resamples, [2.5, 97.5], method="linear")
    _report(
        "bootstrap-contract",
        len(resamples) == 100
        and (lo, hi) == (-1.0, -1.0)
        and resamples == [-1.0] * 100
        and again == (lo, hi, resamples)
        and (lo, hi) == (float(percentiles[0]), float(percentiles[1])),
        f"B=100, inverted input CI=[{lo}, {hi}], seed-stable, 2.5/97.5 percentiles",
    )


def test_rank_ge3_filter():
    deltas = [0.0, -0.05, -0.1, -0.02, -0.2, -0.15, -0.3, -0.1, -0.35, -0.4]
    records = [
        SimpleNamespace(rank=rank, delta=delta)
        for rank, delta in zip(range(1, 11), deltas)
    ]
    ge3 = tau_report(records, "ge3", B=100, seed=13)
    restricted = tau_report([r for r in records if r.rank >= 3], "all", B=100, seed=13)
    same = (
        ge3.estimate == restricted.estimate
        and (ge3.ci_lo, ge3.ci_hi) == (restricted.ci_lo, restricted.ci_hi)
        and ge3.resamples == restricted.resamples
    )
    _report(
        "rank-ge3-filter",
        ge3.estimate.n == 8 and same,
        f"ge3 uses {ge3.estimate.n} of 10 points and equals the restricted-input run",
    )


# -- execution accuracy -------------------------------------------------------------

FOREVER = (
    "WITH RECURSIVE c(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM c) "
    "SELECT count(*) FROM c"
)

# 10 hand-counted (gold, predicted, equivalent?) pairs over the toy database:
# ordered and unordered comparison, float tolerance, parse error, timeout,
# NULL handling, column-count mismatch.  6 of 10 are equivalent.
TOY_PAIRS = [
    ("SELECT num FROM t ORDER BY num", "SELECT num FROM t ORDER BY num", True),
    ("SELECT num FROM t", "SELECT num FROM t ORDER BY num DESC", True),
    ("SELECT num FROM t ORDER BY num", "SELECT num FROM t ORDER BY num DESC", False),
    ("SELECT sum(val) FROM t", "SELECT sum(val) + 0.0000001 FROM t", True),
    ("SELECT num FROM t", "SELEC num FROM t", False),
    ("SELECT count(*) FROM t", FOREVER, False),
    ("SELECT txt FROM t WHERE num = 2", "SELECT txt FROM t WHERE num = 1 + 1", True),
    ("SELECT txt FROM t", "SELECT txt FROM t ORDER BY txt", True),
    ("SELECT num, txt FROM t", "SELECT num FROM t", False),
    ("SELECT count(*) FROM t", "SELECT count(num) FROM t", True),
]


def test_execution_accuracy_harness():
    db_file = DATA / "toy" / "toy.sqlite"
    limits = ExecLimits(timeout_s=0.25, row_cap=1000)
    correct = 0
    surprises = []
    for gold_sql, pred_sql, expected in TOY_PAIRS:
        gold = execute_sql(db_file, gold_sql, limits)
        try:
            pred = execute_sql(db_file, pred_sql, limits)
        except SqlExecutionError:
            outcome = False
        else:
            outcome = results_equivalent(gold, pred, has_order_by(gold_sql))
        if outcome is not expected:
            surprises.append(pred_sql)
        correct += outcome
    accuracy = correct / len(TOY_PAIRS)
    _report(
        "execution-accuracy-harness",
        accuracy == 0.6 and not surprises,
        f"toy database, accuracy {correct}/{len(TOY_PAIRS)}, "
        f"{len(surprises)} unexpected outcomes",
    )


def test_paired_subset_invariant(workspace):
    result = Pipeline(load_config(workspace / "run_config.yaml")).run()
    assert not result.fatal
    outcomes = [
        json.loads(line)
        for line in (workspace / "out" / "outcomes.jsonl").read_text().splitlines()[1:]
    ]
    subsets: dict[tuple, dict[str, set]] = {}
    for o in outcomes:
        sides = subsets.setdefault((o["model_id"], o["rank"]), {})
        sides.setdefault(o["side"], set()).add(o["example_id"])
    violations = [
        key
        for key, sides in subsets.items()
        if sides.get("original", set()) != sides.get("paraphrase", set())
    ]
    rows = (workspace / "out" / "eval_records.csv").read_text().splitlines()[2:]
    n_pairs_ok = all(
        len(subsets[(r[0], int(r[2]))]["original"]) == int(r[3])
        for r in (line.split(",") for line in rows)
    )
    _report(
        "paired-subset-invariant",
        len(subsets) == 8 and not violations and n_pairs_ok,
        f"{len(subsets)} (model, rank) cells, {len(violations)} subset mismatches",
    )


# -- lexical overlap ---------------------------------------------------------------


def test_jaccard_overlap():
    pair = jaccard(QUESTION_A, QUESTION_B)  # 3 shared / 11 distinct tokens
    identity = jaccard("List all stadium names.", "List all stadium names.")
    disjoint = jaccard("alpha beta", "gamma delta")
    _report(
        "jaccard-overlap",
        abs(pair - 3 / 11) <= 1e-12 and identity == 1.0 and disjoint == 0.0,
        f"worked pair {pair:.12f} vs 3/11, identity {identity}, disjoint {disjoint}",
    )


# -- end-to-end --------------------------------------------------------------------


def test_golden_run(workspace, monkeypatch):
    def refuse(*args, **kwargs):
        raise AssertionError("network access attempted during golden run")

    monkeypatch.setattr("socket.socket", refuse)
    monkeypatch.setattr("socket.create_connection", refuse)

    start = time.perf_counter()
    result = Pipeline(load_config(workspace / "run_config.yaml")).run()
    elapsed = time.perf_counter() - start
    assert not result.fatal, result.fatal_reason
    assert result.completed_stages == list(STAGE_ORDER)

    golden = {p.name: p.read_bytes() for p in sorted((DATA / "golden").iterdir())}
    produced = {p.name: p.read_bytes() for p in sorted((workspace / "out").iterdir())}
    differing = sorted(
        name
        for name in golden.keys() | produced.keys()
        if golden.get(name) != produced.get(name)
    )
    _report(
        "golden-run",
        not differing and elapsed < 60.0,
        f"{len(golden)} artifacts byte-identical, {elapsed:.2f}s, sockets disabled",
    )


def test_prompt_fidelity():
    template = prompt_template()
    names = re.findall(r"\{([a-z_]+)\}", template)
    example = Example(
        id="ex-1",
        db_id="db",
        question="How many singers do we have?",
        context_turns=(),
        gold_sql="SELECT count(*) FROM singer",
        schema_text="CREATE TABLE singer (id INT, name TEXT)",
    )
    built = build_prompt(example, GenConfig(num_queries=7))
    expected = (
        template.replace("{num_queries}", "7")
        .replace("{schema_definitions}", example.schema_text)
        .replace("{sql_query}", example.gold_sql)
    )
    three_names = set(names) == {"num_queries", "schema_definitions", "sql_query"}
    all_slots_known = template.count("{") == len(names) == template.count("}")
    _report(
        "prompt-fidelity",
        three_names and all_slots_known and built == expected and "{" not in built,
        "built prompt identical to template outside the three placeholder names",
    )
