"""CoNLL-U reading and the ordered dependency-tree structure.

A DepTree is an ordered, rooted tree over the word lines of one CoNLL-U
sentence.  Node identity for edit-distance purposes is the ``label`` field,
which combines the lowercased lemma (surface form when the lemma column is
empty) with the UPOS tag, e.g. ``have(VERB)``.  Sibling order is token order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConlluParseError, TreeStructureError

_COLUMNS = 10


def node_label(form: str, lemma: str, upos: str) -> str:
    """Build a node label from CoNLL-U columns: lowercased lemma + UPOS.

    Falls back to the surface form when the lemma column is empty or "_".
    """
    base = lemma if lemma and lemma != "_" else form
    return f"{base.lower()}({upos})"


@dataclass(frozen=True)
class DepNode:
    token_index: int  # 1-based position in the sentence
    label: str        # e.g. "have(VERB)"
    pos: str          # UPOS tag


@dataclass
class DepTree:
    """Ordered, rooted dependency tree.

    ``nodes`` is sorted by token_index; ``parents[i]`` is the index into
    ``nodes`` of node i's parent (-1 for the root).  Children of every node
    are ordered ascending by token_index.
    """

    nodes: list[DepNode]
    parents: list[int]
    sent_id: str | None = None
    text: str | None = None
    _children: list[list[int]] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        n = len(self.nodes)
        if n == 0:
            raise TreeStructureError("empty tree")
        if len(self.parents) != n:
            raise TreeStructureError("parents length does not match nodes")
        indices = [node.token_index for node in self.nodes]
        if sorted(indices) != list(range(1, n + 1)):
            raise TreeStructureError(
                f"token indices must be 1..{n} and unique, got {indices}"
            )
        if indices != sorted(indices):
            raise TreeStructureError("nodes must be sorted by token_index")
        roots = [i for i, p in enumerate(self.parents) if p == -1]
        if len(roots) != 1:
            raise TreeStructureError(f"expected exactly one root, found {len(roots)}")
        self._root = roots[0]
        children: list[list[int]] = [[] for _ in range(n)]
        for i, p in enumerate(self.parents):
            if p == -1:
                continue
            if not 0 <= p < n:
                raise TreeStructureError(f"parent index {p} out of range")
            children[p].append(i)
        # nodes are stored in token order, so append order is already sorted
        self._check_acyclic()
        self._children = children

    def _check_acyclic(self) -> None:
        n = len(self.nodes)
        for start in range(n):
            seen = set()
            i = start
            while i != -1:
                if i in seen:
                    raise TreeStructureError("cycle in dependency structure")
                seen.add(i)
                i = self.parents[i]

    @property
    def root(self) -> int:
        return self._root

    def children(self, i: int) -> list[int]:
        return self._children[i]

    def label(self, i: int) -> str:
        return self.nodes[i].label

    def __len__(self) -> int:
        return len(self.nodes)


def _word_lines(block: list[tuple[int, str]]) -> list[tuple[int, list[str]]]:
    """Split a sentence block into word rows, skipping ranges and empty nodes."""
    rows = []
    for lineno, line in block:
        cols = line.split("\t")
        if len(cols) != _COLUMNS:
            raise ConlluParseError(
                f"expected {_COLUMNS} tab-separated columns, got {len(cols)}",
                line_number=lineno,
            )
        token_id = cols[0]
        if "-" in token_id or "." in token_id:
            # multiword-token range or empty node: not part of the tree
            continue
        rows.append((lineno, cols))
    return rows


def _build_tree(
    rows: list[tuple[int, list[str]]], sent_id: str | None, text: str | None
) -> DepTree:
    nodes: list[DepNode] = []
    heads: list[int] = []
    ids: dict[int, int] = {}
    for position, (lineno, cols) in enumerate(rows):
        try:
            token_id = int(cols[0])
        except ValueError:
            raise ConlluParseError(f"non-numeric token id {cols[0]!r}", lineno)
        try:
            head = int(cols[6])
        except ValueError:
            raise ConlluParseError(f"non-numeric HEAD {cols[6]!r}", lineno)
        if token_id in ids:
            raise ConlluParseError(f"duplicate token id {token_id}", lineno)
        ids[token_id] = position
        nodes.append(
            DepNode(
                token_index=token_id,
                label=node_label(form=cols[1], lemma=cols[2], upos=cols[3]),
                pos=cols[3],
            )
        )
        heads.append(head)
    parents = []
    for head in heads:
        if head == 0:
            parents.append(-1)
        elif head in ids:
            parents.append(ids[head])
        else:
            raise TreeStructureError(f"HEAD {head} does not name a token in sentence")
    return DepTree(nodes=nodes, parents=parents, sent_id=sent_id, text=text)


def read_conllu(text: str) -> list[DepTree]:
    """Parse CoNLL-U text into one DepTree per sentence.

    Sentences are blank-line separated; comment lines start with '#'.
    ``# sent_id = ...`` and ``# text = ...`` comments are attached to the
    resulting trees.  Multiword-token ranges ("1-2") and empty nodes ("1.1")
    are skipped.

    Raises ConlluParseError for malformed lines (with the 1-based line
    number) and TreeStructureError for cycles or a root count other than one.
    """
    trees: list[DepTree] = []
    block: list[tuple[int, str]] = []
    sent_id: str | None = None
    sent_text: str | None = None

    def flush() -> None:
        nonlocal block, sent_id, sent_text
        if block:
            trees.append(_build_tree(_word_lines(block), sent_id, sent_text))
        block = []
        sent_id = None
        sent_text = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            comment = line[1:].strip()
            if comment.startswith("sent_id"):
                _, _, value = comment.partition("=")
                sent_id = value.strip()
            elif comment.startswith("text"):
                _, _, value = comment.partition("=")
                sent_text = value.strip()
            continue
        block.append((lineno, line))
    flush()
    return trees
