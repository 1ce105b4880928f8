from fractions import Fraction

from hypothesis import given

from codd_lab.experiments.edit_distance import AnnotatedTree, edit_distance
from tests.helpers import forest_distance, ordered_trees


def children(t):
    return t[1]


def unit(label, depth):
    return Fraction(1)


def halving(label, depth):
    return Fraction(1, 2 ** depth)


def relabel(label_a, depth_a, label_b, depth_b):
    return Fraction(0) if label_a == label_b else Fraction(1)


def distance(a, b, insert=unit, remove=unit):
    return edit_distance(
        a,
        b,
        get_children=children,
        insert_cost=lambda node, depth: insert(node[0], depth),
        remove_cost=lambda node, depth: remove(node[0], depth),
        update_cost=lambda x, dx, y, dy: relabel(x[0], dx, y[0], dy),
    )


def test_annotation_is_post_order_with_depths():
    t = ("r", (("a", ()), ("b", (("c", ()),))))
    annotated = AnnotatedTree(t, children)
    assert [n[0] for n in annotated.nodes] == ["a", "c", "b", "r"]
    assert annotated.depths == [1, 2, 1, 0]
    assert annotated.lmds == [0, 1, 1, 0]
    assert annotated.keyroots == [2, 3]


def test_classic_example():
    a = ("f", (("d", (("a", ()), ("c", (("b", ()),)))), ("e", ())))
    b = ("f", (("c", (("d", (("a", ()), ("b", ()))),)), ("e", ())))
    assert distance(a, b) == 2


def test_identical_trees_are_zero_apart():
    t = ("a", (("b", ()), ("a", (("b", ()),))))
    assert distance(t, t) == 0


def test_deep_deletion_is_cheap_under_halving_costs():
    a = ("a", (("b", (("c", ()),)),))
    b = ("a", (("b", ()),))
    assert distance(a, b, halving, halving) == Fraction(1, 4)


@given(a=ordered_trees, b=ordered_trees)
def test_matches_recursive_forest_distance(a, b):
    expected = forest_distance(a, b, unit, unit, relabel)
    assert distance(a, b) == expected


@given(a=ordered_trees, b=ordered_trees)
def test_matches_recursive_forest_distance_with_depth_costs(a, b):
    expected = forest_distance(a, b, halving, halving, relabel)
    assert distance(a, b, halving, halving) == expected


@given(a=ordered_trees, b=ordered_trees)
def test_symmetric_for_symmetric_costs(a, b):
    assert distance(a, b) == distance(b, a)
