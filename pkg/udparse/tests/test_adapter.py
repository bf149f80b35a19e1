"""Adapter tests: request handling, CoNLL-U validity, CLI, determinism."""

import json
import random
import string
from pathlib import Path

import pytest

from paraprobe.conllu import read_conllu

from udparse import (
    ModelError,
    RequestError,
    load_model,
    parse_sentence,
    parse_to_conllu,
    read_requests,
    tokenize,
)
from udparse.cli import main

QUESTIONS = [
    "How many singers do we have?",
    "How many singers are recorded in the database?",
    "List the name of every singer from France.",
    "What is the average age of all singers?",
    "Show the names and countries of singers older than 30.",
    "Which concerts were held in 2020?",
    "Count the concerts for each stadium.",
    "What are the distinct countries of the singers?",
    "Find the singer who performed at the most concerts.",
    "Give the total number of concerts held per year.",
    "Display the products with a price above 100.",
    "What is the cheapest product in the shop?",
    "How many products were sold in January?",
    "Return the names of products ordered by price.",
    "Tell me the number of sales for product 3.",
    "Do we have concerts and festivals in the same stadium?",
    "Sort the singers by age.",
    "Who sang at the opening concert?",
    "Are there stadiums without concerts?",
    "Show concerts from 2019 through 2021.",
]


def write_requests(path: Path, rows) -> Path:
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    return path


def request_file(tmp_path: Path) -> Path:
    rows = [{"id": f"q-{i:04d}", "text": text} for i, text in enumerate(QUESTIONS)]
    return write_requests(tmp_path / "requests.jsonl", rows)


# -- acceptance ----------------------------------------------------------------


def test_adapter_acceptance(tmp_path, capsys):
    infile = request_file(tmp_path)
    outfile = tmp_path / "parses.conllu"
    assert main(["parse", "--in", str(infile), "--out", str(outfile),
                 "--model", "english-rules"]) == 0
    first = outfile.read_bytes()

    trees = read_conllu(first.decode("utf-8"))  # raises on structural errors
    ids = [t.sent_id for t in trees]
    order_ok = ids == [f"q-{i:04d}" for i in range(len(QUESTIONS))]

    assert main(["parse", "--in", str(infile), "--out", str(outfile),
                 "--model", "english-rules"]) == 0
    deterministic = outfile.read_bytes() == first

    capsys.readouterr()
    ok = len(trees) == len(QUESTIONS) and order_ok and deterministic
    print(
        f"[acceptance] secondary-adapter: {'PASS' if ok else 'FAIL'} "
        f"({len(trees)}/{len(QUESTIONS)} sentences parse cleanly, order "
        f"preserved, rerun byte-identical)",
        flush=True,
    )
    assert ok


# -- parser output -------------------------------------------------------------


def test_worked_example_block():
    model = load_model("english-rules")
    result = parse_to_conllu([("q-1", "How many singers do we have?")], model)
    (tree,) = read_conllu(result.text)
    assert len(tree) == 7
    assert [n.pos for n in tree.nodes].count("PUNCT") == 1
    assert sum(1 for p in tree.parents if p == -1) == 1
    assert tree.label(5) == "have(VERB)"
    assert tree.label(2) == "singer(NOUN)"
    word_lines = [l for l in result.text.splitlines() if l and not l.startswith("#")]
    assert all(len(l.split("\t")) == 10 for l in word_lines)
    assert all(l.split("\t")[2] != "_" and l.split("\t")[3] != "_" for l in word_lines)


def test_every_block_carries_provenance(tmp_path):
    model = load_model("english-rules")
    rows = read_requests(request_file(tmp_path))
    blocks = parse_to_conllu(rows, model).text.strip().split("\n\n")
    assert len(blocks) == len(QUESTIONS)
    assert all("# parser = english-rules 1.0.0" in b for b in blocks)
    assert all(b.splitlines()[0].startswith("# sent_id = ") for b in blocks)
    assert all(b.splitlines()[1].startswith("# text = ") for b in blocks)


def test_random_text_always_yields_valid_trees():
    # fuzz: arbitrary printable garbage must still produce single-rooted
    # trees (or error blocks), never a structurally broken document
    rng = random.Random(5)
    alphabet = string.ascii_letters + string.digits + string.punctuation + "  "
    rows = [
        (f"fuzz-{i}", "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 60))))
        for i in range(150)
    ]
    model = load_model("english-rules")
    result = parse_to_conllu(rows, model)
    trees = read_conllu(result.text)
    assert len(trees) == result.sentences - result.failed


def test_unprocessable_sentence_becomes_error_block():
    model = load_model("english-rules")
    rows = [("a", "Count the singers."), ("b", "   "), ("c", "And the concerts?")]
    result = parse_to_conllu(rows, model)
    assert result.sentences == 3 and result.failed == 1
    blocks = result.text.strip().split("\n\n")
    assert "# error = no tokens after tokenization" in blocks[1]
    assert "# sent_id = b" in blocks[1]
    trees = read_conllu(result.text)
    assert [t.sent_id for t in trees] == ["a", "c"]


def test_parse_sentence_reports_error_field():
    parsed = parse_sentence("empty", "")
    assert parsed.error == "no tokens after tokenization"
    assert parsed.tokens == ()


def test_tokenize_splits_words_and_punctuation():
    assert tokenize("singer's age, 2020?") == ["singer's", "age", ",", "2020", "?"]
    assert tokenize("   ") == []


# -- request files --------------------------------------------------------------


def test_meta_header_line_is_skipped(tmp_path):
    rows = [{"meta": {"seed": 13, "B": 100}},
            {"id": "x", "text": "Show all concerts."}]
    assert read_requests(write_requests(tmp_path / "r.jsonl", rows)) == [
        ("x", "Show all concerts.")
    ]


def test_grouped_rows_expand_in_order(tmp_path):
    rows = [{
        "example_id": "spider-0001",
        "sentences": ["Original question?", "First candidate?", "Second candidate?"],
    }]
    assert read_requests(write_requests(tmp_path / "r.jsonl", rows)) == [
        ("spider-0001", "Original question?"),
        ("spider-0001#p1", "First candidate?"),
        ("spider-0001#p2", "Second candidate?"),
    ]


def test_empty_request_file_is_an_error(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(RequestError, match="no sentences"):
        read_requests(empty)


def test_invalid_json_line_names_the_line(tmp_path):
    path = tmp_path / "r.jsonl"
    path.write_text('{"id": "a", "text": "ok"}\nnot json\n', encoding="utf-8")
    with pytest.raises(RequestError, match="line 2"):
        read_requests(path)


def test_malformed_rows_are_rejected(tmp_path):
    for row in (
        ["not", "an", "object"],
        {"id": "a"},
        {"id": "", "text": "x"},
        {"id": "a", "text": 3},
        {"example_id": "a", "sentences": []},
        {"example_id": "a", "sentences": ["x", 3]},
    ):
        with pytest.raises(RequestError):
            read_requests(write_requests(tmp_path / "bad.jsonl", [row]))


def test_duplicate_ids_are_rejected(tmp_path):
    rows = [{"id": "a", "text": "One."}, {"id": "a", "text": "Two."}]
    with pytest.raises(RequestError, match="duplicate"):
        read_requests(write_requests(tmp_path / "dup.jsonl", rows))


# -- models and CLI --------------------------------------------------------------


def test_unknown_model_lists_available():
    with pytest.raises(ModelError, match="english-rules"):
        load_model("english-gold")


def test_cli_unknown_model_exits_nonzero(tmp_path, capsys):
    infile = request_file(tmp_path)
    code = main(["parse", "--in", str(infile), "--out", str(tmp_path / "o.conllu"),
                 "--model", "nope"])
    assert code == 1
    assert "available: english-rules" in capsys.readouterr().err


def test_cli_missing_request_file_exits_nonzero(tmp_path, capsys):
    code = main(["parse", "--in", str(tmp_path / "absent.jsonl"),
                 "--out", str(tmp_path / "o.conllu")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_cli_reports_error_blocks_but_succeeds(tmp_path, capsys):
    rows = [{"id": "a", "text": "Count the singers."}, {"id": "b", "text": ""}]
    infile = write_requests(tmp_path / "r.jsonl", rows)
    outfile = tmp_path / "o.conllu"
    assert main(["parse", "--in", str(infile), "--out", str(outfile)]) == 0
    captured = capsys.readouterr()
    assert "parsed 1/2 sentences with english-rules 1.0.0" in captured.out
    assert "1 sentence(s) emitted as error blocks" in captured.err


def test_cli_default_model_is_pinned(tmp_path):
    infile = request_file(tmp_path)
    out_default = tmp_path / "default.conllu"
    out_named = tmp_path / "named.conllu"
    assert main(["parse", "--in", str(infile), "--out", str(out_default)]) == 0
    assert main(["parse", "--in", str(infile), "--out", str(out_named),
                 "--model", "english-rules"]) == 0
    assert out_default.read_bytes() == out_named.read_bytes()
