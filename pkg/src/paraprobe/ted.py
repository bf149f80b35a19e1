"""Ordered tree edit distance (Zhang-Shasha) over dependency trees.

Unit costs: insertion 1, deletion 1, substitution 0 when the two node labels
are equal and 1 otherwise.  Sibling order is token order, fixed by DepTree.
"""

from __future__ import annotations

from .conllu import DepTree


class _PostorderTree:
    """Postorder view of a DepTree with leftmost-leaf-descendant indices."""

    __slots__ = ("labels", "lld", "keyroots", "size")

    def __init__(self, tree: DepTree):
        order: list[int] = []

        def visit(i: int) -> None:
            for c in tree.children(i):
                visit(c)
            order.append(i)

        visit(tree.root)
        position = {node: k for k, node in enumerate(order)}
        self.size = len(order)
        self.labels = [tree.label(i) for i in order]
        # leftmost leaf descendant, in postorder positions
        lld = [0] * self.size
        for k, node in enumerate(order):
            current = node
            children = tree.children(current)
            while children:
                current = children[0]
                children = tree.children(current)
            lld[k] = position[current]
        self.lld = lld
        # keyroots: nodes with no ancestor sharing their leftmost leaf
        seen: set[int] = set()
        keyroots = []
        for k in range(self.size - 1, -1, -1):
            if lld[k] not in seen:
                keyroots.append(k)
                seen.add(lld[k])
        self.keyroots = sorted(keyroots)


def ted(a: DepTree, b: DepTree) -> int:
    """Minimal unit-cost edit-script length between two ordered trees."""
    ta, tb = _PostorderTree(a), _PostorderTree(b)
    m, n = ta.size, tb.size
    treedist = [[0] * n for _ in range(m)]

    for i in ta.keyroots:
        for j in tb.keyroots:
            _treedist(ta, tb, i, j, treedist)
    return treedist[m - 1][n - 1]


def _treedist(
    ta: _PostorderTree,
    tb: _PostorderTree,
    i: int,
    j: int,
    treedist: list[list[int]],
) -> None:
    li, lj = ta.lld[i], tb.lld[j]
    m = i - li + 2
    n = j - lj + 2
    fd = [[0] * n for _ in range(m)]
    ioff = li - 1
    joff = lj - 1

    for x in range(1, m):
        fd[x][0] = fd[x - 1][0] + 1  # delete
    for y in range(1, n):
        fd[0][y] = fd[0][y - 1] + 1  # insert

    for x in range(1, m):
        for y in range(1, n):
            if ta.lld[x + ioff] == li and tb.lld[y + joff] == lj:
                cost = 0 if ta.labels[x + ioff] == tb.labels[y + joff] else 1
                fd[x][y] = min(
                    fd[x - 1][y] + 1,
                    fd[x][y - 1] + 1,
                    fd[x - 1][y - 1] + cost,
                )
                treedist[x + ioff][y + joff] = fd[x][y]
            else:
                p = ta.lld[x + ioff] - 1 - ioff
                q = tb.lld[y + joff] - 1 - joff
                fd[x][y] = min(
                    fd[x - 1][y] + 1,
                    fd[x][y - 1] + 1,
                    fd[p][q] + treedist[x + ioff][y + joff],
                )


def ted_normalized(distance: int, a: DepTree, b: DepTree) -> float:
    """Normalize an edit distance by the summed tree sizes; always in [0, 1]."""
    return distance / (len(a) + len(b))
