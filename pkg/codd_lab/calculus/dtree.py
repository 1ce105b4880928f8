"""
Bit-querying binary decision trees.

A tree realizes a labeling of an input space by asking one input bit per
internal node. The inputs reaching any node of a legal tree form a subcube,
which is what makes the exact optimal-tree search a dynamic program over the
3**n subcubes instead of a search over trees.
"""

import json
from collections.abc import Callable, Iterator
from dataclasses import InitVar, dataclass, field
from enum import StrEnum
from fractions import Fraction
from typing import Any, NamedTuple

from codd_lab import logger
from codd_lab.calculus.partitions import (
    BitString,
    Distribution,
    InputSpace,
    Partition,
    check_same_space,
    shannon_of_masses,
)
from codd_lab.core.constants import GAIN_TIE_TOLERANCE, MAX_OPTIMAL_TREE_BITS
from codd_lab.core.exceptions import CapacityError, InvalidTreeError


@dataclass(frozen=True, slots=True)
class Leaf:
    label: int

    @property
    def queried(self) -> frozenset[int]:
        return frozenset()


@dataclass(frozen=True, slots=True)
class Node:
    """
    Internal node querying `bit` (0 = most significant input bit).

    Construction rejects a bit already queried below this node. Growth
    experiments build deliberately redundant trees with `check=False`.
    """

    bit: int
    zero: "DecisionTree"
    one: "DecisionTree"
    check: InitVar[bool] = True
    queried: frozenset[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self, check: bool) -> None:
        if self.bit < 0:
            raise InvalidTreeError(f"bit index must be non-negative, got {self.bit}")
        below = self.zero.queried | self.one.queried
        if check and self.bit in below:
            raise InvalidTreeError(f"bit {self.bit} is queried twice on one path")
        object.__setattr__(self, "queried", below | {self.bit})


DecisionTree = Leaf | Node


class PartitionMode(StrEnum):
    BY_LEAF = "by-leaf"
    BY_OUTPUT = "by-output"


@dataclass(frozen=True, slots=True)
class Labeling:
    """The extensional program a tree must realize: one output per input."""

    space: InputSpace
    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != self.space.size:
            raise InvalidTreeError(
                f"labeling needs {self.space.size} outputs, got {len(self.labels)}"
            )

    @classmethod
    def from_function(cls, space: InputSpace, fn: Callable[[int], int]) -> "Labeling":
        return cls(space, tuple(fn(x) for x in space.inputs()))

    @classmethod
    def constant(cls, space: InputSpace, label: int = 0) -> "Labeling":
        return cls(space, (label,) * space.size)

    def __call__(self, x: int) -> int:
        return self.labels[x]

    def partition(self) -> Partition:
        return Partition.from_labels(self.space, self.labels)

    def is_boolean(self) -> bool:
        return all(label in (0, 1) for label in self.labels)


@dataclass(frozen=True, slots=True)
class Subcube:
    """Inputs agreeing with `value` on the integer bit positions in `mask`."""

    n: int
    mask: int = 0
    value: int = 0

    def _position(self, index: int) -> int:
        return 1 << (self.n - 1 - index)

    def constraint(self, index: int) -> int | None:
        """0 or 1 when bit `index` is fixed, None when free."""
        position = self._position(index)
        if self.mask & position:
            return 1 if self.value & position else 0
        return None

    def free_bits(self) -> list[int]:
        return [i for i in range(self.n) if not self.mask & self._position(i)]

    def restrict(self, index: int, bit_value: int) -> "Subcube":
        position = self._position(index)
        if self.mask & position:
            raise InvalidTreeError(f"bit {index} is already fixed in this subcube")
        return Subcube(self.n, self.mask | position, self.value | (position if bit_value else 0))

    def members(self) -> Iterator[int]:
        free = ((1 << self.n) - 1) & ~self.mask
        sub = free
        while True:
            yield self.value | sub
            if sub == 0:
                return
            sub = (sub - 1) & free


class TreeSolution(NamedTuple):
    tree: DecisionTree
    average_depth: Fraction


def check_tree(t: DecisionTree, space: InputSpace) -> None:
    """Raise unless every queried bit exists in the space."""
    if t.queried and max(t.queried) >= space.n:
        raise InvalidTreeError(
            f"tree queries bit {max(t.queried)} but inputs have {space.n} bits"
        )


def is_legal(t: DecisionTree, n: int) -> bool:
    """True when bits are in range and no path queries a bit twice."""
    if isinstance(t, Leaf):
        return True
    if t.bit >= n or t.bit in t.zero.queried | t.one.queried:
        return False
    return is_legal(t.zero, n) and is_legal(t.one, n)


def _path_to_leaf(t: DecisionTree, space: InputSpace, x: int) -> tuple[Leaf, tuple[int, ...]]:
    path: list[int] = []
    while isinstance(t, Node):
        b = space.bit(x, t.bit)
        path.append(b)
        t = t.one if b else t.zero
    return t, tuple(path)


def eval_tree(t: DecisionTree, x: BitString) -> int:
    """Label of the leaf reached by following the bits of x."""
    while isinstance(t, Node):
        if t.bit >= len(x):
            raise InvalidTreeError(f"tree queries bit {t.bit} of a {len(x)}-bit input")
        t = t.one if x.bit(t.bit) else t.zero
    return t.label


def induced_partition(
    t: DecisionTree,
    space: InputSpace,
    mode: PartitionMode = PartitionMode.BY_LEAF,
) -> Partition:
    """
    Partition of the inputs by reached leaf, or by output label.

    Unreachable leaves contribute no cell.
    """
    check_tree(t, space)
    keys: list[Any] = []
    for x in space.inputs():
        leaf, path = _path_to_leaf(t, space, x)
        keys.append(path if mode == PartitionMode.BY_LEAF else leaf.label)
    return Partition.from_labels(space, keys)


def tree_labeling(t: DecisionTree, space: InputSpace) -> Labeling:
    check_tree(t, space)
    return Labeling(space, tuple(_path_to_leaf(t, space, x)[0].label for x in space.inputs()))


def average_depth(t: DecisionTree, d: Distribution) -> Fraction:
    """Expected number of queries on an input drawn from d."""
    check_tree(t, d.space)
    total = Fraction(0)
    for x in d.space.inputs():
        if d.mass[x]:
            total += d.mass[x] * len(_path_to_leaf(t, d.space, x)[1])
    return total


def tree_size(t: DecisionTree) -> int:
    """Number of internal (decision) nodes."""
    if isinstance(t, Leaf):
        return 0
    return 1 + tree_size(t.zero) + tree_size(t.one)


def leaf_count(t: DecisionTree) -> int:
    return tree_size(t) + 1


def subcube_label_masses(cube: Subcube, lab: Labeling, d: Distribution) -> dict[int, Fraction]:
    """Mass of each output label among the members of a subcube."""
    masses: dict[int, Fraction] = {}
    for x in cube.members():
        masses[lab.labels[x]] = masses.get(lab.labels[x], Fraction(0)) + d.mass[x]
    return masses


def information_gain(cube: Subcube, bit: int, lab: Labeling, d: Distribution) -> float:
    """Shannon information about the label gained by splitting `cube` on `bit`."""
    parent = subcube_label_masses(cube, lab, d)
    parent_mass = sum(parent.values(), Fraction(0))
    if parent_mass == 0:
        return 0.0
    gain = shannon_of_masses(parent.values())
    for v in (0, 1):
        child = subcube_label_masses(cube.restrict(bit, v), lab, d)
        child_mass = sum(child.values(), Fraction(0))
        if child_mass:
            gain -= float(child_mass / parent_mass) * shannon_of_masses(child.values())
    return max(gain, 0.0)


class _SubcubeTable:
    """Per-call memo of subcube mass, purity and optimal cost."""

    def __init__(self, lab: Labeling, d: Distribution, prefer_gain: bool):
        self.lab = lab
        self.d = d
        self.n = lab.space.n
        self.full = (1 << self.n) - 1
        self.prefer_gain = prefer_gain
        self._summary: dict[tuple[int, int], tuple[Fraction, int | None]] = {}
        self._best: dict[tuple[int, int], tuple[Fraction, int | None]] = {}
        self._trees: dict[tuple[int, int], DecisionTree] = {}

    def summary(self, cube: Subcube) -> tuple[Fraction, int | None]:
        """(mass, pure label or None) of a subcube."""
        key = (cube.mask, cube.value)
        cached = self._summary.get(key)
        if cached is not None:
            return cached
        if cube.mask == self.full:
            result = (self.d.mass[cube.value], self.lab.labels[cube.value])
        else:
            b = cube.free_bits()[0]
            m0, l0 = self.summary(cube.restrict(b, 0))
            m1, l1 = self.summary(cube.restrict(b, 1))
            result = (m0 + m1, l0 if l0 is not None and l0 == l1 else None)
        self._summary[key] = result
        return result

    def best(self, cube: Subcube) -> tuple[Fraction, int | None]:
        """(minimal cost, chosen bit) with cost(pure) = 0."""
        key = (cube.mask, cube.value)
        cached = self._best.get(key)
        if cached is not None:
            return cached
        mass, label = self.summary(cube)
        if label is not None:
            result: tuple[Fraction, int | None] = (Fraction(0), None)
        else:
            costs = {
                b: mass + self.best(cube.restrict(b, 0))[0] + self.best(cube.restrict(b, 1))[0]
                for b in cube.free_bits()
            }
            minimum = min(costs.values())
            tied = [b for b, c in costs.items() if c == minimum]
            result = (minimum, self._break_tie(cube, tied))
        self._best[key] = result
        return result

    def _break_tie(self, cube: Subcube, tied: list[int]) -> int:
        if not self.prefer_gain or len(tied) == 1:
            return tied[0]
        gains = {b: information_gain(cube, b, self.lab, self.d) for b in tied}
        top = max(gains.values())
        leaders = [b for b in tied if gains[b] >= top - GAIN_TIE_TOLERANCE]
        if len(leaders) == 1:
            return leaders[0]
        return min(leaders, key=lambda b: serialized_form(self._split(cube, b)))

    def _split(self, cube: Subcube, b: int) -> DecisionTree:
        return Node(b, self.build(cube.restrict(b, 0)), self.build(cube.restrict(b, 1)))

    def build(self, cube: Subcube) -> DecisionTree:
        key = (cube.mask, cube.value)
        cached = self._trees.get(key)
        if cached is not None:
            return cached
        _, label = self.summary(cube)
        if label is not None:
            tree: DecisionTree = Leaf(label)
        else:
            tree = self._split(cube, self.best(cube)[1])
        self._trees[key] = tree
        return tree


def optimal_tree(lab: Labeling, d: Distribution, prefer_gain: bool = False) -> TreeSolution:
    """
    Tree realizing `lab` exactly with minimal average depth under d.

    cost(pure subcube) = 0 and cost(S) = min over free bits b of
    mass(S) + cost(S|b=0) + cost(S|b=1). Ties go to the lowest bit index; with
    `prefer_gain`, tied bits are first ranked by information gain so that the
    most entropy-reducing questions are asked nearest the root, and bits still
    tied there go to the lexicographically smaller serialized subtree.

    Raises:
        CapacityError: if the space has more than MAX_OPTIMAL_TREE_BITS bits
    """
    check_same_space(lab.space, d.space)
    if lab.space.n > MAX_OPTIMAL_TREE_BITS:
        raise CapacityError(
            f"optimal_tree supports n <= {MAX_OPTIMAL_TREE_BITS}, got n={lab.space.n}"
        )
    table = _SubcubeTable(lab, d, prefer_gain)
    root = Subcube(lab.space.n)
    cost, _ = table.best(root)
    tree = table.build(root)
    logger.debug(f"optimal tree on n={lab.space.n}: {tree_size(tree)} nodes, depth {cost}")
    return TreeSolution(tree, cost)


def greedy_tree(lab: Labeling, d: Distribution) -> DecisionTree:
    """
    Top-down tree splitting on the bit of maximal information gain.

    Zero-gain splits are taken while the subcube is impure, so every labeling
    is realized; ties go to the lowest bit index.
    """
    check_same_space(lab.space, d.space)

    def grow(cube: Subcube) -> DecisionTree:
        labels = {lab.labels[x] for x in cube.members()}
        if len(labels) == 1:
            return Leaf(labels.pop())
        gains = [(information_gain(cube, b, lab, d), b) for b in cube.free_bits()]
        top = max(g for g, _ in gains)
        bit = next(b for g, b in gains if g >= top - GAIN_TIE_TOLERANCE)
        return Node(bit, grow(cube.restrict(bit, 0)), grow(cube.restrict(bit, 1)))

    return grow(Subcube(lab.space.n))


def tree_to_dict(t: DecisionTree) -> dict[str, Any]:
    if isinstance(t, Leaf):
        return {"leaf": t.label}
    return {"bit": t.bit, "zero": tree_to_dict(t.zero), "one": tree_to_dict(t.one)}


def tree_from_dict(data: Any) -> DecisionTree:
    """
    Parse the tree JSON form {"leaf": int} | {"bit": int, "zero": ..., "one": ...}.

    Raises:
        InvalidTreeError: on any other shape or a repeated bit on a path
    """
    if not isinstance(data, dict):
        raise InvalidTreeError(f"tree node must be an object, got {type(data).__name__}")
    if set(data) == {"leaf"} and isinstance(data["leaf"], int):
        return Leaf(data["leaf"])
    if set(data) == {"bit", "zero", "one"} and isinstance(data["bit"], int):
        return Node(data["bit"], tree_from_dict(data["zero"]), tree_from_dict(data["one"]))
    raise InvalidTreeError(f"unrecognized tree node keys: {sorted(data)}")


def serialized_form(t: DecisionTree) -> str:
    """Canonical compact JSON text; orders gain-tied splits under `prefer_gain`."""
    return json.dumps(tree_to_dict(t), sort_keys=True, separators=(",", ":"))
