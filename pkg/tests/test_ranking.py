"""Paraphrase ranking by syntactic distance."""

import pytest

from helpers import make_tree
from paraprobe.ranking import rank_paraphrases


def _chain(labels):
    return make_tree(labels, [-1] + list(range(len(labels) - 1)))


def test_ranks_follow_distance_with_stable_ties():
    # a chain "a" plus k fresh labels sits at distance exactly k from ["a"]
    original = _chain(["a"])

    def padded(k):
        return _chain(["a"] + [f"x{i}" for i in range(k)])

    candidates = [
        ("seven", padded(7)),
        ("three-first", padded(3)),
        ("three-second", padded(3)),
        ("nine", padded(9)),
    ]
    ranked = rank_paraphrases(original, candidates)
    assert [p.ted for p in ranked] == [7, 3, 3, 9]
    assert [p.rank for p in ranked] == [3, 1, 2, 4]
    # generation order preserved in the returned list
    assert [p.text for p in ranked] == ["seven", "three-first", "three-second", "nine"]


def test_identical_candidate_gets_rank_one():
    original = _chain(["a", "b", "c"])
    ranked = rank_paraphrases(
        original,
        [("far", _chain(["x", "y", "z", "w"])), ("same", _chain(["a", "b", "c"]))],
    )
    same = next(p for p in ranked if p.text == "same")
    assert same.ted == 0
    assert same.rank == 1


def test_ranks_are_a_permutation():
    original = _chain(["a", "b"])
    candidates = [(f"c{i}", _chain(["a"] * (i + 1))) for i in range(6)]
    ranked = rank_paraphrases(original, candidates)
    assert sorted(p.rank for p in ranked) == list(range(1, 7))


def test_normalized_distance_recorded():
    original = _chain(["a", "b"])
    ranked = rank_paraphrases(original, [("c", _chain(["a", "b", "c"]))])
    assert ranked[0].ted == 1
    assert ranked[0].ted_norm == pytest.approx(1 / 5)


def test_empty_candidates_rejected():
    with pytest.raises(ValueError):
        rank_paraphrases(_chain(["a"]), [])


def test_filter_fields_start_unset():
    ranked = rank_paraphrases(_chain(["a"]), [("b", _chain(["b"]))])
    assert ranked[0].cosine is None
    assert ranked[0].retained is None
