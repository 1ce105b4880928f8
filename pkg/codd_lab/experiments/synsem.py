"""
Syntax-semantics correlation.

Semantic distance between two Boolean programs is their expected
disagreement under a distribution. Syntactic distance is a weighted ordered
edit distance between their smallest decision trees, with every internal
node labeled by the entropy reduction its question provides and every node
carrying the probability of reaching it.
"""

import math
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from typing import Any

import polars as pl

from codd_lab import logger
from codd_lab.calculus.dtree import (
    DecisionTree,
    Labeling,
    Leaf,
    Subcube,
    average_depth,
    greedy_tree,
    information_gain,
    is_legal,
    optimal_tree,
    tree_labeling,
)
from codd_lab.calculus.partitions import Distribution, InputSpace, check_same_space
from codd_lab.core.config import CorrelationConfig
from codd_lab.core.constants import MAX_CORRELATION_BITS
from codd_lab.core.exceptions import (
    CapacityError,
    InvalidParameterError,
    InvalidTreeError,
    NonBooleanLabelError,
)
from codd_lab.experiments.edit_distance import edit_distance
from codd_lab.utils import derive_rng, format_rational, map_ordered, parse_rational


def semantic_distance(f: Labeling, g: Labeling, d: Distribution) -> Fraction:
    """Expected disagreement sum_x mass(x) * |f(x) - g(x)| of Boolean labelings."""
    check_same_space(f.space, g.space)
    check_same_space(f.space, d.space)
    if not (f.is_boolean() and g.is_boolean()):
        raise NonBooleanLabelError("semantic distance is defined for 0/1 outputs only")
    return sum(
        (d.mass[x] for x in f.space.inputs() if f.labels[x] != g.labels[x]),
        Fraction(0),
    )


@dataclass(frozen=True, slots=True)
class EntropyLabeledTree:
    """
    A decision tree whose internal nodes carry the entropy reduction of
    their question within their subcube. Leaves carry gain 0 and keep their
    output label. `mass` is the probability of reaching the node.
    """

    gain: Fraction
    bit: int | None = None
    output: int | None = None
    children: tuple["EntropyLabeledTree", ...] = ()
    mass: Fraction = Fraction(1)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def relabel_key(self) -> tuple:
        if self.is_leaf:
            return ("leaf", self.output)
        return ("node", self.bit)

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)


def entropy_labels(t: DecisionTree, lab: Labeling, d: Distribution) -> EntropyLabeledTree:
    """
    Label each internal node with the Shannon information its split gives
    about the output, within the node's subcube under d.

    Raises:
        InvalidTreeError: if t is not a legal tree realizing lab
    """
    check_same_space(lab.space, d.space)
    if not is_legal(t, lab.space.n) or tree_labeling(t, lab.space) != lab:
        raise InvalidTreeError("entropy labels need a legal tree realizing the labeling")

    def label(node: DecisionTree, cube: Subcube) -> EntropyLabeledTree:
        mass = sum((d.mass[x] for x in cube.members()), Fraction(0))
        if isinstance(node, Leaf):
            return EntropyLabeledTree(Fraction(0), output=node.label, mass=mass)
        gain = Fraction(information_gain(cube, node.bit, lab, d))
        return EntropyLabeledTree(
            gain,
            bit=node.bit,
            children=(
                label(node.zero, cube.restrict(node.bit, 0)),
                label(node.one, cube.restrict(node.bit, 1)),
            ),
            mass=mass,
        )

    return label(t, Subcube(lab.space.n))


class CostVariant(StrEnum):
    ENTROPY = "entropy"
    DEPTH = "depth"


@dataclass(frozen=True, slots=True)
class EditCostScheme:
    """
    Base costs scaled per node by mass * (1 + entropy label) for the
    entropy variant, or by decay**depth for the depth variant.
    """

    variant: CostVariant
    relabel: Fraction = Fraction(1)
    insert: Fraction = Fraction(1)
    delete: Fraction = Fraction(1)
    decay: Fraction = Fraction(1, 2)

    def __post_init__(self) -> None:
        if min(self.relabel, self.insert, self.delete) <= 0:
            raise InvalidParameterError("edit base costs must be positive")
        if not 0 < self.decay <= 1:
            raise InvalidParameterError(f"decay must lie in (0, 1], got {self.decay}")

    def weight(self, node: EntropyLabeledTree, depth: int) -> Fraction:
        if self.variant == CostVariant.ENTROPY:
            return node.mass * (1 + node.gain)
        return self.decay ** depth


def tree_edit_distance(a: EntropyLabeledTree, b: EntropyLabeledTree, c: EditCostScheme) -> Fraction:
    """
    Ordered edit distance between entropy-labeled trees.

    Mapping a node onto one asking the same question (or a leaf onto a leaf
    with the same output) costs the relabel base times the difference of
    their weights; otherwise it costs the relabel base times the larger
    weight. With equal base costs this keeps the distance a pseudo-metric.
    """

    def update(x: EntropyLabeledTree, dx: int, y: EntropyLabeledTree, dy: int) -> Fraction:
        wx, wy = c.weight(x, dx), c.weight(y, dy)
        if x.relabel_key() == y.relabel_key():
            return c.relabel * abs(wx - wy)
        return c.relabel * max(wx, wy)

    return edit_distance(
        a,
        b,
        get_children=lambda node: node.children,
        insert_cost=lambda node, depth: c.insert * c.weight(node, depth),
        remove_cost=lambda node, depth: c.delete * c.weight(node, depth),
        update_cost=update,
    )


@dataclass(frozen=True, slots=True)
class PairRecord:
    pair_id: int
    semantic: Fraction
    syntactic: dict[str, Fraction]
    greedy_excess: Fraction


@dataclass(frozen=True)
class CorrelationReport:
    config: dict[str, Any]
    records: list[PairRecord]
    spearman: dict[str, float | None]
    pearson: dict[str, float | None]
    distribution: list[str] = field(default_factory=list)

    def to_frame(self) -> pl.DataFrame:
        """One row per pair: pair_id, semantic, then syn_<scheme> per scheme."""
        data: dict[str, list] = {
            "pair_id": [r.pair_id for r in self.records],
            "semantic": [float(r.semantic) for r in self.records],
        }
        for scheme in self.config["schemes"]:
            data[f"syn_{scheme}"] = [float(r.syntactic[scheme]) for r in self.records]
        return pl.DataFrame(data)

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "distribution": self.distribution,
            "spearman": self.spearman,
            "pearson": self.pearson,
            "records": [
                {
                    "pair_id": r.pair_id,
                    "semantic": format_rational(r.semantic),
                    "syntactic": {k: format_rational(v) for k, v in r.syntactic.items()},
                    "greedy_excess": format_rational(r.greedy_excess),
                }
                for r in self.records
            ],
        }


def sample_pair(seed: int, pair_id: int, space: InputSpace, flip_max: Fraction) -> tuple[Labeling, Labeling]:
    """
    f uniform over Boolean labelings; g flips each output of f independently
    with probability q, q uniform on [0, flip_max] per pair.
    """
    rng = derive_rng(seed, pair_id)
    f = rng.integers(0, 2, size=space.size)
    q = rng.uniform(0.0, float(flip_max))
    flips = rng.random(space.size) < q
    g = f ^ flips
    return (
        Labeling(space, tuple(int(v) for v in f)),
        Labeling(space, tuple(int(v) for v in g)),
    )


def smallest_entropy_tree(lab: Labeling, d: Distribution) -> EntropyLabeledTree:
    """Entropy-labeled optimal tree, preferring entropy reduction near the root."""
    return entropy_labels(optimal_tree(lab, d, prefer_gain=True).tree, lab, d)


@dataclass(frozen=True, slots=True)
class _PairTask:
    pair_id: int
    seed: int
    distribution: Distribution
    flip_max: Fraction
    schemes: tuple[EditCostScheme, ...]


def _evaluate_pair(task: _PairTask) -> PairRecord:
    d = task.distribution
    f, g = sample_pair(task.seed, task.pair_id, d.space, task.flip_max)
    tree_f, tree_g = smallest_entropy_tree(f, d), smallest_entropy_tree(g, d)
    excess = sum(
        (
            average_depth(greedy_tree(lab, d), d) - optimal_tree(lab, d).average_depth
            for lab in (f, g)
        ),
        Fraction(0),
    )
    return PairRecord(
        pair_id=task.pair_id,
        semantic=semantic_distance(f, g, d),
        syntactic={
            str(scheme.variant): tree_edit_distance(tree_f, tree_g, scheme)
            for scheme in task.schemes
        },
        greedy_excess=excess,
    )


def _correlation(frame: pl.DataFrame, column: str, method: str) -> float | None:
    value = frame.select(pl.corr("semantic", column, method=method)).item()
    if value is None or math.isnan(value):
        return None
    return float(value)


def correlation_experiment(
    config: CorrelationConfig,
    d: Distribution | None = None,
    jobs: int = 1,
) -> CorrelationReport:
    """
    Sample Boolean-function pairs, measure semantic and syntactic distance
    under each scheme, and report Spearman and Pearson coefficients.

    Coefficients of a constant column are undefined and reported as None.

    Raises:
        CapacityError: if config.n exceeds the supported size
    """
    if config.n > MAX_CORRELATION_BITS:
        raise CapacityError(f"correlation runs support n <= {MAX_CORRELATION_BITS}")
    space = InputSpace(config.n)
    d = d if d is not None else Distribution.uniform(space)
    check_same_space(space, d.space)

    schemes = tuple(
        EditCostScheme(CostVariant(name), decay=parse_rational(config.decay))
        for name in config.schemes
    )
    tasks = [
        _PairTask(i, config.seed, d, parse_rational(config.flip_max), schemes)
        for i in range(config.pairs)
    ]
    logger.info(f"Correlating {config.pairs} pairs on n={config.n} (seed {config.seed})")
    records = map_ordered(_evaluate_pair, tasks, jobs)

    report = CorrelationReport(
        config=config.model_dump(mode="json"),
        records=records,
        spearman={},
        pearson={},
        distribution=[format_rational(m) for m in d.mass],
    )
    frame = report.to_frame()
    for scheme in config.schemes:
        report.spearman[scheme] = _correlation(frame, f"syn_{scheme}", "spearman")
        report.pearson[scheme] = _correlation(frame, f"syn_{scheme}", "pearson")
        logger.info(
            f"scheme {scheme}: spearman={report.spearman[scheme]} pearson={report.pearson[scheme]}"
        )
    return report
