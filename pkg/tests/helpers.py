"""Shared fixture builders for the test suite."""

from __future__ import annotations

import random

from paraprobe.conllu import DepNode, DepTree, read_conllu


def make_tree(labels: list[str], parents: list[int]) -> DepTree:
    """Tree from parallel label / parent-index lists (-1 marks the root)."""
    nodes = [
        DepNode(token_index=i + 1, label=label, pos="X")
        for i, label in enumerate(labels)
    ]
    return DepTree(nodes=nodes, parents=parents)


def conllu_sentence(sent_id: str, text: str, rows: list[tuple]) -> str:
    """One CoNLL-U sentence; rows are (id, form, lemma, upos, head)."""
    lines = [f"# sent_id = {sent_id}", f"# text = {text}"]
    for token_id, form, lemma, upos, head in rows:
        lines.append(
            "\t".join(
                [str(token_id), form, lemma, upos, "_", "_", str(head), "_", "_", "_"]
            )
        )
    return "\n".join(lines) + "\n"


# Dependency trees for "How many singers do we have?" and
# "How many singers are recorded in the database?"; node labels follow the
# lemma(UPOS) convention with lemmas chosen to match the reference parses.

QUESTION_A = "How many singers do we have?"
QUESTION_B = "How many singers are recorded in the database?"

_ROWS_A = [
    (1, "How", "how", "SCONJ", 2),
    (2, "many", "many", "ADJ", 3),
    (3, "singers", "singer", "NOUN", 6),
    (4, "do", "do", "AUX", 6),
    (5, "we", "we", "PRON", 6),
    (6, "have", "have", "VERB", 0),
    (7, "?", "?", "PUNCT", 6),
]

_ROWS_B = [
    (1, "How", "how", "SCONJ", 2),
    (2, "many", "many", "ADJ", 3),
    (3, "singers", "singer", "NOUN", 5),
    (4, "are", "are", "AUX", 5),
    (5, "recorded", "recorded", "VERB", 0),
    (6, "in", "in", "ADP", 5),
    (7, "the", "the", "DET", 8),
    (8, "database", "database", "NOUN", 6),
    (9, "?", "?", "PUNCT", 5),
]


def worked_example_conllu() -> str:
    return (
        conllu_sentence("worked-a", QUESTION_A, _ROWS_A)
        + "\n"
        + conllu_sentence("worked-b", QUESTION_B, _ROWS_B)
    )


def worked_example_trees() -> tuple[DepTree, DepTree]:
    tree_a, tree_b = read_conllu(worked_example_conllu())
    return tree_a, tree_b


def random_dep_tree(rng: random.Random, max_nodes: int, alphabet: int) -> DepTree:
    """Random ordered tree with labels drawn from a small alphabet.

    Every node's parent has a smaller token index, which reaches every
    ordered-tree shape up to relabeling.
    """
    n = rng.randint(1, max_nodes)
    labels = [f"L{rng.randrange(alphabet)}" for _ in range(n)]
    parents = [-1] + [rng.randrange(i) for i in range(1, n)]
    return make_tree(labels, parents)
