"""Brute-force oracles and hypothesis strategies shared by the test modules."""

from collections.abc import Iterator
from fractions import Fraction
from functools import lru_cache

from hypothesis import strategies as st

from codd_lab.calculus.dtree import DecisionTree, Labeling, Leaf, Node, Subcube, average_depth
from codd_lab.calculus.expr import DECODE, ENCODE, K, S, SP, CoddExpr, apply, decide, leaf
from codd_lab.calculus.partitions import Distribution, InputSpace
from codd_lab.experiments.synsem import EntropyLabeledTree


# =============================================================================
# Strategies
# =============================================================================


def labelings(n: int, alphabet: int = 2) -> st.SearchStrategy[Labeling]:
    space = InputSpace(n)
    return st.lists(
        st.integers(0, alphabet - 1), min_size=space.size, max_size=space.size
    ).map(lambda labels: Labeling(space, tuple(labels)))


def distributions(n: int) -> st.SearchStrategy[Distribution]:
    """Random distributions with small integer weights, zeros allowed."""
    space = InputSpace(n)
    return (
        st.lists(st.integers(0, 5), min_size=space.size, max_size=space.size)
        .filter(lambda weights: sum(weights) > 0)
        .map(lambda weights: Distribution.from_weights(space, weights))
    )


bit_strings = st.text(alphabet="01", max_size=6)

atoms = st.one_of(
    bit_strings.map(leaf),
    st.sampled_from([K, S, SP, ENCODE, DECODE]),
)

expressions: st.SearchStrategy[CoddExpr] = st.recursive(
    atoms,
    lambda sub: st.one_of(
        st.builds(apply, sub, sub),
        st.builds(decide, st.integers(0, 5), sub, sub),
    ),
    max_leaves=12,
)

first_order = st.recursive(
    bit_strings.map(leaf),
    lambda sub: st.builds(decide, st.integers(0, 3), sub, sub),
    max_leaves=8,
)

# ordered labeled trees as (label, children)
ordered_trees = st.recursive(
    st.sampled_from("ab").map(lambda label: (label, ())),
    lambda sub: st.tuples(st.sampled_from("ab"), st.lists(sub, min_size=1, max_size=3).map(tuple)),
    max_leaves=4,
)

_masses = st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1)])

# entropy-labeled trees with arbitrary gains and reach masses
labeled_trees = st.recursive(
    st.builds(
        lambda output, mass: EntropyLabeledTree(Fraction(0), output=output, mass=mass),
        st.integers(0, 1),
        _masses,
    ),
    lambda sub: st.builds(
        lambda bit, gain, children, mass: EntropyLabeledTree(gain, bit=bit, children=tuple(children), mass=mass),
        st.integers(0, 1),
        st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(1)]),
        st.lists(sub, min_size=1, max_size=2),
        _masses,
    ),
    max_leaves=3,
)


def small_labeled_trees(max_nodes: int) -> st.SearchStrategy[EntropyLabeledTree]:
    return labeled_trees.filter(lambda t: t.node_count() <= max_nodes)


# =============================================================================
# Oracles
# =============================================================================


def all_trees(lab: Labeling, cube: Subcube | None = None) -> Iterator[DecisionTree]:
    """Every legal tree realizing `lab` on `cube`, including non-minimal ones."""
    cube = cube if cube is not None else Subcube(lab.space.n)
    labels = {lab.labels[x] for x in cube.members()}
    if len(labels) == 1:
        yield Leaf(labels.pop())
    for b in cube.free_bits():
        for zero in all_trees(lab, cube.restrict(b, 0)):
            for one in all_trees(lab, cube.restrict(b, 1)):
                yield Node(b, zero, one)


def brute_force_depth(lab: Labeling, d: Distribution) -> Fraction:
    return min(average_depth(t, d) for t in all_trees(lab))


def oracle_dits(labels: tuple[int, ...]) -> set[tuple[int, int]]:
    return {
        (x, y)
        for x in range(len(labels))
        for y in range(x + 1, len(labels))
        if labels[x] != labels[y]
    }


def forest_distance(a, b, insert, remove, update) -> Fraction:
    """
    Recursive forest edit distance over (label, children) trees; costs take
    (label, depth) as in the tree's original position.
    """

    def annotate(t, depth):
        return (t[0], depth, tuple(annotate(c, depth + 1) for c in t[1]))

    def total(forest, cost) -> Fraction:
        return sum((cost(v[0], v[1]) + total(v[2], cost) for v in forest), Fraction(0))

    @lru_cache(maxsize=None)
    def dist(F, G) -> Fraction:
        if not F:
            return total(G, insert)
        if not G:
            return total(F, remove)
        v, w = F[-1], G[-1]
        return min(
            dist(F[:-1] + v[2], G) + remove(v[0], v[1]),
            dist(F, G[:-1] + w[2]) + insert(w[0], w[1]),
            dist(F[:-1], G[:-1]) + dist(v[2], w[2]) + update(v[0], v[1], w[0], w[1]),
        )

    return dist((annotate(a, 0),), (annotate(b, 0),))


def as_ordered_tree(t: EntropyLabeledTree):
    """(label, children) form of an entropy-labeled tree, labeled by its nodes."""
    return (t, tuple(as_ordered_tree(c) for c in t.children))


def random_tree(rng, free: list[int], stop: float = 0.3) -> DecisionTree:
    """A legal random tree querying only the bits in `free`, labels in 0..3."""
    if not free or rng.random() < stop:
        return Leaf(int(rng.integers(4)))
    bit = free[int(rng.integers(len(free)))]
    rest = [b for b in free if b != bit]
    return Node(bit, random_tree(rng, rest, stop), random_tree(rng, rest, stop))
