"""
Combinatorial Decision Dags: fueled evaluation, size, and pattern-based
memoization.

Reduction is normal order (leftmost-outermost) with these rules:

    K y x          -> y
    S f g x        -> (f x) (g x)
    Sp f x y       -> (f x) (f y)
    Encode v       -> Leaf(encode(v))          v normalized first
    Decode Leaf(b) -> decode(b)
    Decide(i, z, o) Leaf(b) -> o if bit i of b is 1 else z
                               (bits past the end of b read as 0)
    Leaf(b) x      -> Leaf(b)                  a leaf is a constant output

Decode and Decide first reduce their argument; if it does not become a Leaf
the application is stuck and part of the normal form.
"""

from collections.abc import Sequence
from dataclasses import dataclass

from codd_lab import logger
from codd_lab.calculus.dtree import DecisionTree, Labeling, Leaf
from codd_lab.calculus.encoding import decode, encode
from codd_lab.calculus.expr import (
    SP,
    CoddExpr,
    Tag,
    apply,
    apply_all,
    canonical_order,
    decide,
    leaf,
    spine,
    unfolded_size,
)
from codd_lab.calculus.partitions import BitString, InputSpace, Partition
from codd_lab.core.constants import DEFAULT_FUEL
from codd_lab.core.exceptions import (
    EvaluationError,
    FuelExhaustedError,
    InvalidParameterError,
)


@dataclass(frozen=True, slots=True)
class Normalized:
    value: CoddExpr
    steps: int


@dataclass(frozen=True, slots=True)
class FuelExhausted:
    steps: int


EvalOutcome = Normalized | FuelExhausted


class _OutOfFuel(Exception):
    pass


class _Reducer:
    """Call-local reduction state: remaining fuel and a normal-form memo."""

    def __init__(self, fuel: int):
        self.fuel = fuel
        self.steps = 0
        # keyed by id; the source node is kept alive alongside its normal form
        self._normal: dict[int, tuple[CoddExpr, CoddExpr]] = {}

    def _tick(self) -> None:
        if self.steps >= self.fuel:
            raise _OutOfFuel
        self.steps += 1

    def whnf(self, e: CoddExpr) -> CoddExpr:
        """Reduce until the head of the spine can take no step."""
        while True:
            head, args = spine(e)
            match head.tag:
                case Tag.K if len(args) >= 2:
                    self._tick()
                    e = apply_all(args[0], *args[2:])
                case Tag.S if len(args) >= 3:
                    f, g, x = args[:3]
                    self._tick()
                    e = apply_all(apply(apply(f, x), apply(g, x)), *args[3:])
                case Tag.SP if len(args) >= 3:
                    f, x, y = args[:3]
                    self._tick()
                    e = apply_all(apply(apply(f, x), apply(f, y)), *args[3:])
                case Tag.ENCODE if args:
                    value = self.normalize(args[0])
                    self._tick()
                    e = apply_all(leaf(encode(value).bits), *args[1:])
                case Tag.DECODE if args:
                    operand = self.whnf(args[0])
                    if not operand.is_leaf:
                        return apply_all(head, operand, *args[1:])
                    self._tick()
                    e = apply_all(decode(operand.output), *args[1:])
                case Tag.DECIDE if args:
                    operand = self.whnf(args[0])
                    if not operand.is_leaf:
                        return apply_all(head, operand, *args[1:])
                    self._tick()
                    branch = head.on_one if operand.output.bit(head.bit_index) else head.on_zero
                    e = apply_all(branch, *args[1:])
                case Tag.LEAF if args:
                    self._tick()
                    e = apply_all(head, *args[1:])
                case _:
                    return e

    def normalize(self, e: CoddExpr) -> CoddExpr:
        cached = self._normal.get(id(e))
        if cached is not None:
            return cached[1]
        head, args = spine(self.whnf(e))
        if head.tag == Tag.DECIDE:
            head = decide(head.bit_index, self.normalize(head.on_zero), self.normalize(head.on_one))
        result = apply_all(head, *(self.normalize(a) for a in args))
        self._normal[id(e)] = (e, result)
        return result


def eval_codd(
    e: CoddExpr,
    args: Sequence[CoddExpr] = (),
    fuel: int = DEFAULT_FUEL,
) -> EvalOutcome:
    """
    Normal form of `e a1 ... ak`, or the number of steps taken when fuel ran out.

    Raises:
        DecodeError: if Decode meets a Leaf that is not a valid encoding
        EvaluationError: if the expression nests too deeply to reduce
    """
    if fuel < 1:
        raise InvalidParameterError(f"fuel must be positive, got {fuel}")
    reducer = _Reducer(fuel)
    try:
        value = reducer.normalize(apply_all(e, *args))
    except _OutOfFuel:
        logger.debug(f"evaluation ran out of fuel after {reducer.steps} steps")
        return FuelExhausted(reducer.steps)
    except RecursionError as exc:
        raise EvaluationError(f"expression nests too deeply after {reducer.steps} steps") from exc
    return Normalized(value, reducer.steps)


def codd_size(e: CoddExpr) -> int:
    """Number of distinct Decide nodes; a shared node counts once."""
    return sum(1 for node in canonical_order(e) if node.tag == Tag.DECIDE)


@dataclass(frozen=True, slots=True)
class Repeat:
    """A subdag used as the function of two or more applications."""

    pattern: CoddExpr
    sites: tuple[CoddExpr, ...]
    occurrences: int


def _path_counts(e: CoddExpr) -> dict[int, int]:
    """Number of root paths reaching each node, i.e. its unfolded multiplicity."""
    order = canonical_order(e)
    counts = {id(node): 0 for node in order}
    counts[id(e)] = 1
    for node in reversed(order):
        for child in node.children:
            counts[id(child)] += counts[id(node)]
    return counts


def find_repeats(e: CoddExpr) -> list[Repeat]:
    """
    Subdags occurring at least twice as the function of an application,
    largest first, ties in canonical order.
    """
    order = canonical_order(e)
    position = {id(node): i for i, node in enumerate(order)}
    counts = _path_counts(e)

    sites: dict[int, list[CoddExpr]] = {}
    patterns: dict[int, CoddExpr] = {}
    for node in order:
        if node.tag == Tag.APPLY:
            patterns[id(node.fn)] = node.fn
            sites.setdefault(id(node.fn), []).append(node)

    repeats = [
        Repeat(patterns[key], tuple(found), sum(counts[id(site)] for site in found))
        for key, found in sites.items()
    ]
    repeats = [r for r in repeats if r.occurrences >= 2]
    repeats.sort(key=lambda r: (-unfolded_size(r.pattern), position[id(r.pattern)]))
    return repeats


def _rewrite_sites(e: CoddExpr, pattern: CoddExpr) -> tuple[CoddExpr, int]:
    rebuilt: dict[int, CoddExpr] = {}
    rewritten = 0
    for node in canonical_order(e):
        if not node.children:
            rebuilt[id(node)] = node
            continue
        children = tuple(rebuilt[id(c)] for c in node.children)
        if node.tag == Tag.DECIDE:
            new = decide(node.bit_index, *children)
        else:
            fn, arg = children
            if (
                fn.tag == Tag.APPLY and fn.fn is pattern
                and arg.tag == Tag.APPLY and arg.fn is pattern
            ):
                new = apply_all(SP, pattern, fn.arg, arg.arg)
                rewritten += 1
            else:
                new = apply(fn, arg)
        rebuilt[id(node)] = new
    return rebuilt[id(e)], rewritten


def memoize_rewrite(e: CoddExpr, pattern: CoddExpr) -> CoddExpr:
    """
    Rewrite every (P a) (P b) into Sp P a b for P = `pattern`.

    The result has the same normal form on every argument and its unfolded
    node count does not grow. A pattern used fewer than twice leaves the
    expression unchanged.
    """
    counts = _path_counts(e)
    occurrences = sum(
        counts[id(node)] for node in canonical_order(e)
        if node.tag == Tag.APPLY and node.fn is pattern
    )
    if occurrences < 2:
        logger.warning(f"pattern occurs {occurrences} time(s) as a function; nothing to memoize")
        return e
    result, rewritten = _rewrite_sites(e, pattern)
    if rewritten == 0:
        logger.warning("pattern is repeated but never in (P a) (P b) position; nothing to memoize")
    else:
        logger.debug(f"memoized {rewritten} site(s)")
    return result


def memoize_all(e: CoddExpr) -> CoddExpr:
    """Apply memoize_rewrite for every repeat found in `e`, largest first."""
    for repeat in find_repeats(e):
        result, rewritten = _rewrite_sites(e, repeat.pattern)
        if rewritten:
            logger.debug(f"memoized {rewritten} site(s) of a {unfolded_size(repeat.pattern)}-node pattern")
            e = result
    return e


def tree_to_codd(t: DecisionTree, label_bits: int | None = None) -> CoddExpr:
    """
    First-order CoDD for a decision tree: Decide nodes over Leaf outputs
    holding each label as a `label_bits`-wide big-endian bit string.
    """
    if label_bits is None:
        label_bits = max(1, max(_labels(t)).bit_length())

    def convert(node: DecisionTree) -> CoddExpr:
        if isinstance(node, Leaf):
            return leaf(BitString.from_int(node.label, label_bits))
        return decide(node.bit, convert(node.zero), convert(node.one))

    return convert(t)


def _labels(t: DecisionTree) -> list[int]:
    if isinstance(t, Leaf):
        return [t.label]
    return _labels(t.zero) + _labels(t.one)


def codd_labeling(e: CoddExpr, space: InputSpace, fuel: int = DEFAULT_FUEL) -> Labeling:
    """
    Extensional view of `e` on an input space: apply it to each input as a
    Leaf and number the distinct normal forms by first occurrence.

    Raises:
        FuelExhaustedError: if any input fails to normalize within `fuel`
    """
    outputs: list[CoddExpr] = []
    for x in space.inputs():
        outcome = eval_codd(e, [leaf(space.bitstring(x))], fuel)
        if isinstance(outcome, FuelExhausted):
            raise FuelExhaustedError(outcome.steps)
        outputs.append(outcome.value)
    return Labeling(space, Partition.from_labels(space, (id(o) for o in outputs)).cell)
