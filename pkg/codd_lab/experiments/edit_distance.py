"""
Ordered tree edit distance (Zhang-Shasha) with exact, position-aware costs.

Costs are callbacks receiving the node and its depth (root = 0), so a cost
scheme can weight edits by what a node is or by where it sits.
"""

from collections.abc import Callable, Sequence
from fractions import Fraction
from typing import Generic, TypeVar

T = TypeVar("T")

ChildrenFn = Callable[[T], Sequence[T]]
NodeCost = Callable[[T, int], Fraction]
UpdateCost = Callable[[T, int, T, int], Fraction]


class AnnotatedTree(Generic[T]):
    """
    Post-order view of a tree: nodes, their depths, leftmost leaf
    descendants (lmds) and the keyroots of the Zhang-Shasha recursion.
    """

    def __init__(self, root: T, get_children: ChildrenFn):
        self.nodes: list[T] = []
        self.depths: list[int] = []
        self.lmds: list[int] = []
        self._visit(root, 0, get_children)

        # keyroots: the highest-numbered node for each leftmost leaf
        last_with_lmd: dict[int, int] = {}
        for i, lmd in enumerate(self.lmds):
            last_with_lmd[lmd] = i
        self.keyroots = sorted(last_with_lmd.values())

    def _visit(self, node: T, depth: int, get_children: ChildrenFn) -> int:
        """Append the subtree in post-order; return its leftmost leaf index."""
        leftmost: int | None = None
        for child in get_children(node):
            child_lmd = self._visit(child, depth + 1, get_children)
            if leftmost is None:
                leftmost = child_lmd
        index = len(self.nodes)
        self.nodes.append(node)
        self.depths.append(depth)
        self.lmds.append(index if leftmost is None else leftmost)
        return self.lmds[index]

    def __len__(self) -> int:
        return len(self.nodes)


def edit_distance(
    a: T,
    b: T,
    get_children: ChildrenFn,
    insert_cost: NodeCost,
    remove_cost: NodeCost,
    update_cost: UpdateCost,
) -> Fraction:
    """
    Minimal total cost of deletions, insertions and relabelings turning the
    ordered tree `a` into `b`.
    """
    A = AnnotatedTree(a, get_children)
    B = AnnotatedTree(b, get_children)
    treedists = [[Fraction(0)] * len(B) for _ in range(len(A))]

    def remove(i: int) -> Fraction:
        return remove_cost(A.nodes[i], A.depths[i])

    def insert(j: int) -> Fraction:
        return insert_cost(B.nodes[j], B.depths[j])

    def treedist(i: int, j: int) -> None:
        Al, Bl = A.lmds, B.lmds
        m = i - Al[i] + 2
        n = j - Bl[j] + 2
        fd = [[Fraction(0)] * n for _ in range(m)]

        ioff = Al[i] - 1
        joff = Bl[j] - 1

        for x in range(1, m):
            fd[x][0] = fd[x - 1][0] + remove(x + ioff)
        for y in range(1, n):
            fd[0][y] = fd[0][y - 1] + insert(y + joff)

        for x in range(1, m):
            for y in range(1, n):
                ax, by = x + ioff, y + joff
                if Al[i] == Al[ax] and Bl[j] == Bl[by]:
                    # both prefixes are whole trees
                    fd[x][y] = min(
                        fd[x - 1][y] + remove(ax),
                        fd[x][y - 1] + insert(by),
                        fd[x - 1][y - 1]
                        + update_cost(A.nodes[ax], A.depths[ax], B.nodes[by], B.depths[by]),
                    )
                    treedists[ax][by] = fd[x][y]
                else:
                    p = Al[ax] - 1 - ioff
                    q = Bl[by] - 1 - joff
                    fd[x][y] = min(
                        fd[x - 1][y] + remove(ax),
                        fd[x][y - 1] + insert(by),
                        fd[p][q] + treedists[ax][by],
                    )

    for i in A.keyroots:
        for j in B.keyroots:
            treedist(i, j)

    return treedists[-1][-1]
