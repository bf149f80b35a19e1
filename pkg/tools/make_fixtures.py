#!/usr/bin/env python3
"""Regenerate the committed test fixtures under tests/data/.

Produces, deterministically:

* a 12-record spider-style benchmark (two SQLite databases; one record
  references a database that does not exist, one record's gold SQL errors),
* a toy SQLite database for the execution-accuracy fixture,
* scripted client transcripts (paraphrase generator, two NL2SQL models,
  embedding table) aligned with the benchmark,
* chain-style dependency parses in CoNLL-U for every original question and
  candidate paraphrase,
* the run config consumed by the pipeline tests, and
* the golden output bundle (a full pipeline run over the above).

The model transcripts are assembled by running the front half of the
pipeline in-process, so per-rank accuracy targets hold no matter how the
tree-edit-distance ranking orders the hand-written candidates.

Regenerating the SQLite files can change their bytes across SQLite library
versions; the committed files are the source of truth for golden-bundle
comparisons.
"""

from __future__ import annotations

import json
import re
import shutil
import sqlite3
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "tests" / "data"

sys.path.insert(0, str(REPO / "src"))

from paraprobe.conllu import read_conllu  # noqa: E402
from paraprobe.ingest import load_benchmark  # noqa: E402
from paraprobe.pipeline import Pipeline  # noqa: E402
from paraprobe.config import load_config  # noqa: E402
from paraprobe.ranking import rank_paraphrases  # noqa: E402
from paraprobe.sqleval import usable_examples  # noqa: E402

# --------------------------------------------------------------------------
# benchmark definition
# --------------------------------------------------------------------------

CONCERTS_SQL = [
    "CREATE TABLE singer (singer_id INTEGER PRIMARY KEY, name TEXT, age INTEGER, country TEXT)",
    "CREATE TABLE concert (concert_id INTEGER PRIMARY KEY, title TEXT, year INTEGER, singer_id INTEGER)",
    "INSERT INTO singer VALUES (1,'Ada',30,'UK'),(2,'Ben',25,'US'),(3,'Cleo',35,'UK'),"
    "(4,'Dmitri',40,'RU'),(5,'Eva',28,'US')",
    "INSERT INTO concert VALUES (1,'Spring Fest',2019,1),(2,'Summer Jam',2020,2),"
    "(3,'Autumn Gala',2020,3),(4,'Winter Show',2021,1),(5,'New Year Bash',2021,5),"
    "(6,'Encore Night',2022,4)",
]

SHOP_SQL = [
    "CREATE TABLE product (product_id INTEGER PRIMARY KEY, name TEXT, price REAL)",
    "CREATE TABLE sales (sale_id INTEGER PRIMARY KEY, product_id INTEGER, qty INTEGER)",
    "INSERT INTO product VALUES (1,'pen',1.5),(2,'book',12.0),(3,'lamp',23.75),(4,'desk',150.0)",
    "INSERT INTO sales VALUES (1,1,10),(2,2,3),(3,1,5),(4,3,2),(5,4,1),(6,2,4)",
]

TOY_SQL = [
    "CREATE TABLE t (num INTEGER, txt TEXT, val REAL)",
    "INSERT INTO t VALUES (1,'alpha',1.5),(2,'beta',2.5),(3,'gamma',3.25),(4,NULL,0.75)",
]

DEV_RECORDS = [
    ("concerts", "How many singers do we have?", "SELECT count(*) FROM singer"),
    ("concerts", "List the names of all singers.", "SELECT name FROM singer"),
    ("concerts", "What are the names of singers ordered by age?",
     "SELECT name FROM singer ORDER BY age"),
    ("concerts", "How many concerts took place in 2020?",
     "SELECT count(*) FROM concert WHERE year = 2020"),
    ("concerts", "What is the average age of all singers?", "SELECT avg(age) FROM singer"),
    ("concerts", "Which countries do the singers come from?",
     "SELECT DISTINCT country FROM singer"),
    ("shop", "How many products does the shop carry?", "SELECT count(*) FROM product"),
    ("shop", "What is the name of the most expensive product?",
     "SELECT name FROM product ORDER BY price DESC LIMIT 1"),
    ("shop", "What is the total quantity of items sold?", "SELECT sum(qty) FROM sales"),
    ("shop", "List every product name with its price.", "SELECT name, price FROM product"),
    # gold SQL references a table that does not exist: ingested but unusable
    ("shop", "How many warehouses does the shop operate?", "SELECT count(*) FROM warehouse"),
    # database missing entirely: skipped at ingest
    ("archive", "How many files are archived?", "SELECT count(*) FROM files"),
]

CANDIDATES = {
    "spider-0000": [
        "What is the number of singers?",
        "How many singers are there in total?",
        "Count the singers listed in the database.",
        "What is the total number of individual singers recorded?",
    ],
    "spider-0001": [
        "What are the names of the singers?",
        "Show the name of every singer.",
        "Give me a list containing each singer's name.",
        "Which names belong to the singers stored in this database?",
    ],
    "spider-0002": [
        "List singer names sorted by age.",
        "What are the singers' names, ordered from youngest to oldest?",
        "Show every singer's name arranged according to their age.",
        "Sort the singers by age and return each of their names in that order.",
    ],
    "spider-0003": [
        "How many concerts happened in 2020?",
        "What is the number of concerts held during 2020?",
        "Count the concerts that were staged in the year 2020.",
        "In the year 2020, how many separate concerts were actually held?",
    ],
    "spider-0004": [
        "What is the singers' average age?",
        "Compute the mean age across all singers.",
        "On average, how old are the singers in the database?",
        "What value do you get when you average the ages of every singer?",
    ],
    "spider-0005": [
        "Which countries are the singers from?",
        "List the distinct countries represented by singers.",
        "From which different countries do the listed singers originate?",
        "Name every unique country that at least one singer calls home.",
    ],
    "spider-0006": [
        "How many products are there?",
        "What is the number of products in the shop?",
        "Count the distinct products that the shop currently carries.",
        "What is the total count of product entries kept by the shop?",
    ],
    "spider-0007": [
        "Which product costs the most?",
        "What is the priciest product called?",
        "Give the name of the product with the highest price.",
        "Among all products on sale, which single one carries the top price?",
    ],
    "spider-0008": [
        "What is the total quantity sold?",
        "How many items were sold altogether?",
        "Sum the quantities across every recorded sale.",
        "Adding all sales together, what overall quantity of items moved?",
    ],
    "spider-0009": [
        "List each product name and price.",
        "Show all products together with their prices.",
        "What are the names and prices of every product sold?",
        "For each product in the catalog, give both its name and its price.",
    ],
    "spider-0010": [
        "How many warehouses are there?",
        "What is the number of warehouses operated?",
        "Count the warehouses that the shop currently runs.",
        "What is the total number of warehouse locations the shop uses?",
    ],
}

# model behavior: which original predictions are correct, and how many
# paraphrase predictions are correct at each rank (picked so the per-rank
# deltas are exactly representable: m1 strictly decreasing, m2 mixed)
ORIG_CORRECT = {
    "spider-0000", "spider-0001", "spider-0003",
    "spider-0004", "spider-0007", "spider-0008",
}
WRONG_ORIG_REPLY = {
    "spider-0002": "SELECT name FROM singr ORDER BY age",   # no such table
    "spider-0005": "SELECT country FROM singer",            # duplicates vs DISTINCT
    "spider-0006": "SELEC count(*) FROM product",           # syntax error
    "spider-0009": "SELECT name FROM product",              # wrong column count
}
PARA_CORRECT_COUNT = {
    "sql-m1": {1: 6, 2: 4, 3: 4, 4: 3},
    "sql-m2": {1: 5, 2: 5, 3: 4, 4: 5},
}
EXPECTED_DELTAS = {
    "sql-m1": {1: Fraction(0), 2: Fraction(-1, 9), 3: Fraction(-1, 5), 4: Fraction(-1, 3)},
    "sql-m2": {1: Fraction(-1, 10), 2: Fraction(0), 3: Fraction(-1, 5), 4: Fraction(-1, 9)},
}
# (example, rank) pairs whose candidate the cosine filter must drop
DROPPED_AT = [("spider-0007", 2), ("spider-0002", 4)]

RETAINED_VEC = [1.0, 0.0]
DROPPED_VEC = [0.6, 0.8]  # cosine 0.6 against [1, 0], below the 0.69 threshold

RUN_CONFIG = """\
benchmark:
  path: benchmark
  format: spider
generation:
  client:
    kind: scripted
    transcript: transcripts/generator.json
    model_id: gen-fixture
  num_queries: 4
  temperature: 0.0
  max_attempts: 2
parses:
  files:
    - parses/fixture.conllu
filter:
  client:
    kind: scripted
    fixture: transcripts/embeddings.json
  cosine_threshold: 0.69
  jaccard_bins:
    - [0.0, 0.35]
    - [0.35, 0.7]
    - [0.7, 1.01]
  length_bins: 6
evaluation:
  models:
    - kind: scripted
      transcript: transcripts/m1.json
      model_id: sql-m1
    - kind: scripted
      transcript: transcripts/m2.json
      model_id: sql-m2
  timeout_s: 5.0
  row_cap: 1000
stats:
  bootstrap_samples: 100
  seed: 13
  rank_filters: [all, ge3]
out_dir: out
cache_dir: cache
workers: 1
"""

_TOKEN = re.compile(r"[A-Za-z0-9']+|[^A-Za-z0-9\s]")


def build_db(path: Path, statements: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.exists():
        path.unlink()
    con = sqlite3.connect(path)
    for stmt in statements:
        con.execute(stmt)
    con.commit()
    con.close()


def chain_conllu(sent_id: str, text: str) -> str:
    """One CoNLL-U sentence: token i hangs off token i-1, token 1 is root."""
    tokens = _TOKEN.findall(text)
    lines = [f"# sent_id = {sent_id}", f"# text = {text}"]
    for i, form in enumerate(tokens, start=1):
        lemma = form.lower()
        if re.fullmatch(r"[^A-Za-z0-9']", form):
            upos = "PUNCT"
        elif form.isdigit():
            upos = "NUM"
        else:
            upos = "X"
        head = i - 1
        deprel = "root" if head == 0 else "dep"
        lines.append(
            f"{i}\t{form}\t{lemma}\t{upos}\t_\t_\t{head}\t{deprel}\t_\t_"
        )
    return "\n".join(lines)


def fenced(sql: str) -> str:
    return f"```sql\n{sql}\n```"


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)

    # -- benchmark directory --------------------------------------------------
    bench = DATA / "benchmark"
    build_db(bench / "database" / "concerts" / "concerts.sqlite", CONCERTS_SQL)
    build_db(bench / "database" / "shop" / "shop.sqlite", SHOP_SQL)
    dev = [
        {"db_id": db, "question": q, "query": sql}
        for db, q, sql in DEV_RECORDS
    ]
    (bench / "dev.json").write_text(json.dumps(dev, indent=2) + "\n", encoding="utf-8")

    build_db(DATA / "toy" / "toy.sqlite", TOY_SQL)

    benchmark = load_benchmark(bench, "spider")
    assert [e.id for e in benchmark.examples] == [f"spider-{i:04d}" for i in range(11)]
    assert benchmark.skipped == ["spider-0011"]
    usable = usable_examples(benchmark)
    assert usable == {f"spider-{i:04d}" for i in range(10)}, usable
    by_id = {e.id: e for e in benchmark.examples}

    all_texts = [e.question for e in benchmark.examples]
    for cands in CANDIDATES.values():
        all_texts.extend(cands)
    assert len(set(all_texts)) == len(all_texts), "duplicate fixture text"

    # transcript matches carry the trailing newline so one quoted block can
    # never match a prompt whose block merely starts with the same prefix
    transcripts = DATA / "transcripts"
    transcripts.mkdir(exist_ok=True)
    gen_rules = []
    for eid, cands in CANDIDATES.items():
        listing = "\n".join(f"{j}. {text}" for j, text in enumerate(cands, start=1))
        gen_rules.append(
            {"match": f"SQL Query:\n{by_id[eid].gold_sql}\n", "response": listing}
        )
    (transcripts / "generator.json").write_text(
        json.dumps(gen_rules, indent=2) + "\n", encoding="utf-8"
    )

    # -- parses ---------------------------------------------------------------
    sentences = [chain_conllu(eid, by_id[eid].question) for eid in CANDIDATES]
    for eid, cands in CANDIDATES.items():
        sentences.extend(
            chain_conllu(f"{eid}#p{j}", text)
            for j, text in enumerate(cands, start=1)
        )
    parses_dir = DATA / "parses"
    parses_dir.mkdir(exist_ok=True)
    conllu_text = "\n\n".join(sentences) + "\n"
    (parses_dir / "fixture.conllu").write_text(conllu_text, encoding="utf-8")

    # -- ranks (computed exactly as the pipeline will) ------------------------
    trees = {t.sent_id: t for t in read_conllu(conllu_text)}
    rank_of: dict[str, dict[int, str]] = {}  # eid -> {rank: text}
    for eid, cands in CANDIDATES.items():
        pairs = [(text, trees[f"{eid}#p{j}"]) for j, text in enumerate(cands, start=1)]
        ranked = rank_paraphrases(trees[eid], pairs)
        rank_of[eid] = {p.rank: p.text for p in ranked}
        print(f"{eid}: " + ", ".join(
            f"r{p.rank}=ted{p.ted}" for p in sorted(ranked, key=lambda p: p.rank)
        ))

    # -- embeddings -------------------------------------------------------------
    dropped_texts = {rank_of[eid][rank] for eid, rank in DROPPED_AT}
    table = {e.question: RETAINED_VEC for e in benchmark.examples}
    for cands in CANDIDATES.values():
        for text in cands:
            table[text] = DROPPED_VEC if text in dropped_texts else RETAINED_VEC
    (transcripts / "embeddings.json").write_text(
        json.dumps(table, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    # -- NL2SQL model transcripts ----------------------------------------------
    eval_ids = [e.id for e in benchmark.examples if e.id in usable]
    subsets = {}
    for rank in (1, 2, 3, 4):
        subsets[rank] = [
            eid for eid in eval_ids
            if not (eid, rank) in DROPPED_AT
        ]
    for model_id, per_rank in PARA_CORRECT_COUNT.items():
        rules = []
        for eid in eval_ids:
            question = by_id[eid].question
            if eid in ORIG_CORRECT:
                reply = fenced(by_id[eid].gold_sql) if model_id == "sql-m1" else by_id[eid].gold_sql
            else:
                reply = WRONG_ORIG_REPLY[eid]
                if model_id == "sql-m2":
                    reply = fenced(reply)
            rules.append({"match": f"Question:\n{question}\n", "response": reply})
        for rank in (1, 2, 3, 4):
            subset = subsets[rank]
            orig_correct_n = sum(1 for eid in subset if eid in ORIG_CORRECT)
            para_correct_n = per_rank[rank]
            delta = Fraction(para_correct_n - orig_correct_n, len(subset))
            assert delta == EXPECTED_DELTAS[model_id][rank], (
                model_id, rank, delta, EXPECTED_DELTAS[model_id][rank]
            )
            for pos, eid in enumerate(subset):
                text = rank_of[eid][rank]
                reply = by_id[eid].gold_sql if pos < para_correct_n else "SELECT 0"
                rules.append({"match": f"Question:\n{text}\n", "response": reply})
        name = "m1.json" if model_id == "sql-m1" else "m2.json"
        (transcripts / name).write_text(
            json.dumps(rules, indent=2) + "\n", encoding="utf-8"
        )

    # -- run config -------------------------------------------------------------
    (DATA / "run_config.yaml").write_text(RUN_CONFIG, encoding="utf-8")

    # -- golden bundle ------------------------------------------------------------
    with tempfile.TemporaryDirectory() as tmp:
        scratch = Path(tmp)
        for sub in ("benchmark", "transcripts", "parses"):
            shutil.copytree(DATA / sub, scratch / sub)
        shutil.copy(DATA / "run_config.yaml", scratch / "run_config.yaml")
        pipeline = Pipeline(load_config(scratch / "run_config.yaml"))
        result = pipeline.run()
        if result.fatal:
            raise SystemExit(f"golden pipeline run failed: {result.fatal_reason}")
        golden = DATA / "golden"
        if golden.exists():
            shutil.rmtree(golden)
        shutil.copytree(scratch / "out", golden)
        tau = json.loads((golden / "tau.json").read_text(encoding="utf-8"))
        for report in tau["reports"]:
            print(
                f"{report['model_id']} {report['rank_filter']}: "
                f"tau={report['tau']:.6f} ci=[{report['ci_lo']:.6f}, {report['ci_hi']:.6f}] "
                f"n={report['n']}"
            )
    print(f"fixtures written under {DATA}")


if __name__ == "__main__":
    main()
