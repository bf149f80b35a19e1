"""Rank paraphrase candidates by syntactic distance from the original."""

from __future__ import annotations

from dataclasses import dataclass

from .conllu import DepTree
from .ted import ted, ted_normalized


@dataclass
class RankedParaphrase:
    """One paraphrase candidate with its syntactic-distance rank.

    ``rank`` runs 1..m ascending by tree edit distance, assigned before any
    cosine filtering; ``cosine`` and ``retained`` stay None until the
    semantic filter fills them.  ``tree`` may be None on instances rehydrated
    from the cache (the tree is only needed while ranking).
    """

    text: str
    tree: DepTree | None
    ted: int
    ted_norm: float
    rank: int
    cosine: float | None = None
    retained: bool | None = None


def rank_paraphrases(
    original: DepTree, candidates: list[tuple[str, DepTree]]
) -> list[RankedParaphrase]:
    """Compute TED against the original and assign ranks 1..m.

    Ties are broken by generation order (stable sort).  The returned list
    preserves generation order; ranks encode the distance ordering.
    """
    if not candidates:
        raise ValueError("candidates must be non-empty")
    ranked = []
    for text, tree in candidates:
        distance = ted(original, tree)
        ranked.append(
            RankedParaphrase(
                text=text,
                tree=tree,
                ted=distance,
                ted_norm=ted_normalized(distance, original, tree),
                rank=0,
            )
        )
    by_distance = sorted(range(len(ranked)), key=lambda i: ranked[i].ted)
    for rank, i in enumerate(by_distance, start=1):
        ranked[i].rank = rank
    return ranked
