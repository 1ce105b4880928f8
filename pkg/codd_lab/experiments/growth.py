"""
Random growth of decision programs and the logical entropy of their outputs.

A growth step replaces one leaf by a decision node over two new leaves.
The partition of inputs by output can only get finer, so logical entropy
never decreases; the experiments here measure that step by step, as a trend
over program size, and as a concentration profile at a fixed size.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
import polars as pl

from codd_lab import logger
from codd_lab.calculus.dtree import DecisionTree, Leaf, Node, Subcube
from codd_lab.calculus.partitions import (
    Distribution,
    InputSpace,
    check_same_space,
    max_logical_entropy,
)
from codd_lab.core.config import EnsembleConfig, GrowthConfig, ProfileConfig
from codd_lab.core.constants import (
    CSV_TRACE_COLUMNS,
    ENSEMBLE_QUANTILES,
    PROFILE_HISTOGRAM_BINS,
)
from codd_lab.core.exceptions import GrowthError
from codd_lab.utils import derive_rng, format_rational, map_ordered, parse_rational

Path = tuple[int, ...]


@dataclass(frozen=True, slots=True)
class GrowthStep:
    """Replace the leaf at `target` (0/1 branch choices from the root)."""

    target: Path
    bit_index: int
    label0: int
    label1: int


def expand_leaf(t: DecisionTree, step: GrowthStep) -> DecisionTree:
    """
    Replace the target leaf by Decide(bit_index, Leaf(label0), Leaf(label1)).

    The bit may already be queried on the path; one branch is then
    unreachable.

    Raises:
        GrowthError: if the target path does not end at a leaf
    """
    if step.bit_index < 0:
        raise GrowthError(f"bit index must be non-negative, got {step.bit_index}")

    def rebuild(node: DecisionTree, depth: int) -> DecisionTree:
        if depth == len(step.target):
            if not isinstance(node, Leaf):
                raise GrowthError(f"target {step.target} is a decision node, not a leaf")
            return Node(step.bit_index, Leaf(step.label0), Leaf(step.label1), check=False)
        if isinstance(node, Leaf):
            raise GrowthError(f"target {step.target} runs past a leaf at depth {depth}")
        if step.target[depth]:
            return Node(node.bit, node.zero, rebuild(node.one, depth + 1), check=False)
        return Node(node.bit, rebuild(node.zero, depth + 1), node.one, check=False)

    return rebuild(t, 0)


def leaf_paths(t: DecisionTree) -> list[Path]:
    """Paths of all leaves, left to right."""
    if isinstance(t, Leaf):
        return [()]
    return [(0, *p) for p in leaf_paths(t.zero)] + [(1, *p) for p in leaf_paths(t.one)]


@dataclass(slots=True)
class _GrowingLeaf:
    path: Path
    label: int
    cube: Subcube | None  # None: no input reaches this leaf
    mass: Fraction


class GrowthProcess:
    """
    A tree grown one random step at a time, with the output label masses
    kept up to date so logical entropy is exact and cheap at every step.

    New leaves take either the label of the leaf they replace or a label no
    reachable leaf carries yet. The partition of inputs by output is then
    refined at every step, never coarsened.
    """

    def __init__(self, d: Distribution, alphabet: int, rng: np.random.Generator):
        if alphabet < 1:
            raise GrowthError(f"label alphabet must have at least one symbol, got {alphabet}")
        self.d = d
        self.alphabet = alphabet
        self.rng = rng
        label = int(rng.integers(alphabet))
        self.tree: DecisionTree = Leaf(label)
        # leaves in creation order; _position maps a path to its slot
        self._leaves = [_GrowingLeaf((), label, Subcube(d.space.n), Fraction(1))]
        self._position: dict[Path, int] = {(): 0}
        self._label_mass: dict[int, Fraction] = {label: Fraction(1)}
        self._label_leaves: Counter[int] = Counter({label: 1})
        self.size = 0

    def _cube_mass(self, cube: Subcube | None) -> Fraction:
        if cube is None:
            return Fraction(0)
        return sum((self.d.mass[x] for x in cube.members()), Fraction(0))

    def _shift_mass(self, label: int, delta: Fraction) -> None:
        mass = self._label_mass.get(label, Fraction(0)) + delta
        if mass:
            self._label_mass[label] = mass
        else:
            self._label_mass.pop(label, None)

    def admissible_labels(self, path: Path) -> list[int]:
        """Labels a child of the leaf at `path` may take without merging output cells."""
        own = self._leaves[self._position[path]].label
        return [b for b in range(self.alphabet) if b == own or not self._label_leaves[b]]

    def logical_entropy(self) -> Fraction:
        """Logical entropy of the partition of inputs by output label."""
        return 1 - sum((m * m for m in self._label_mass.values()), Fraction(0))

    def random_step(self) -> GrowthStep:
        """Uniform leaf, uniform bit index, labels uniform over the admissible ones."""
        path = self._leaves[int(self.rng.integers(len(self._leaves)))].path
        bit = int(self.rng.integers(self.d.space.n))
        labels = self.admissible_labels(path)
        label0 = labels[int(self.rng.integers(len(labels)))]
        label1 = labels[int(self.rng.integers(len(labels)))]
        return GrowthStep(path, bit, label0, label1)

    def apply(self, step: GrowthStep) -> None:
        """
        Expand one leaf.

        Raises:
            GrowthError: if the step targets no leaf, queries a bit outside
                the input, or gives a reachable child a label other reachable
                leaves already carry
        """
        if step.bit_index >= self.d.space.n:
            raise GrowthError(f"bit index {step.bit_index} is outside a {self.d.space.n}-bit input")
        index = self._position.get(step.target)
        if index is None:
            raise GrowthError(f"no leaf at {step.target}")
        old = self._leaves[index]

        if old.cube is None:
            cubes: list[Subcube | None] = [None, None]
        elif (fixed := old.cube.constraint(step.bit_index)) is not None:
            cubes = [old.cube, None] if fixed == 0 else [None, old.cube]
        else:
            cubes = [old.cube.restrict(step.bit_index, 0), old.cube.restrict(step.bit_index, 1)]

        allowed = set(self.admissible_labels(step.target))
        for label, cube in zip((step.label0, step.label1), cubes):
            if not 0 <= label < self.alphabet:
                raise GrowthError(f"label {label} is outside an alphabet of {self.alphabet}")
            if cube is not None and label not in allowed:
                raise GrowthError(f"label {label} already marks other inputs; the step would merge output cells")
        self.tree = expand_leaf(self.tree, step)

        children = [
            _GrowingLeaf((*old.path, branch), label, cube, self._cube_mass(cube))
            for branch, (label, cube) in enumerate(zip((step.label0, step.label1), cubes))
        ]
        self._shift_mass(old.label, -old.mass)
        if old.cube is not None:
            self._label_leaves[old.label] -= 1
        for child in children:
            self._shift_mass(child.label, child.mass)
            if child.cube is not None:
                self._label_leaves[child.label] += 1

        zero, one = children
        del self._position[old.path]
        self._leaves[index] = zero
        self._position[zero.path] = index
        self._position[one.path] = len(self._leaves)
        self._leaves.append(one)
        self.size += 1

    def grow(self, steps: int) -> None:
        for _ in range(steps):
            self.apply(self.random_step())


@dataclass(frozen=True, slots=True)
class TraceEntry:
    step: int
    size: int
    entropy: Fraction


@dataclass(frozen=True)
class GrowthTrace:
    seed: int
    n: int
    alphabet: int
    distribution: list[str]
    entries: list[TraceEntry]
    tree: DecisionTree = field(repr=False, compare=False)

    def violations(self) -> int:
        """Steps where logical entropy went down."""
        return sum(
            1 for prev, cur in zip(self.entries, self.entries[1:]) if cur.entropy < prev.entropy
        )

    def to_frame(self) -> pl.DataFrame:
        return pl.DataFrame(
            {
                "step": [e.step for e in self.entries],
                "size": [e.size for e in self.entries],
                "entropy_num": [e.entropy.numerator for e in self.entries],
                "entropy_den": [e.entropy.denominator for e in self.entries],
            },
            schema={name: pl.Int64 for name in CSV_TRACE_COLUMNS},
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "n": self.n,
            "alphabet": self.alphabet,
            "distribution": self.distribution,
            "entries": [
                {"step": e.step, "size": e.size, "entropy": format_rational(e.entropy)}
                for e in self.entries
            ],
        }


def _resolve_distribution(n: int, d: Distribution | None) -> Distribution:
    space = InputSpace(n)
    if d is None:
        return Distribution.uniform(space)
    check_same_space(space, d.space)
    return d


def grow_random(config: GrowthConfig, d: Distribution | None = None) -> GrowthTrace:
    """
    Grow a random tree from a single random-label leaf, recording size and
    by-output logical entropy after every step.
    """
    d = _resolve_distribution(config.n, d)
    process = GrowthProcess(d, config.alphabet, derive_rng(config.seed))
    entries = [TraceEntry(0, 0, process.logical_entropy())]
    for step in range(1, config.steps + 1):
        process.apply(process.random_step())
        entries.append(TraceEntry(step, process.size, process.logical_entropy()))

    trace = GrowthTrace(
        seed=config.seed,
        n=config.n,
        alphabet=config.alphabet,
        distribution=[format_rational(m) for m in d.mass],
        entries=entries,
        tree=process.tree,
    )
    logger.info(
        f"grew {config.steps} steps on n={config.n}: final entropy "
        f"{format_rational(entries[-1].entropy)}, {trace.violations()} decrease(s)"
    )
    return trace


@dataclass(frozen=True, slots=True)
class _SampleTask:
    seed: int
    size: int
    sample: int
    alphabet: int
    distribution: Distribution


def _grown_entropy(task: _SampleTask) -> Fraction:
    process = GrowthProcess(
        task.distribution, task.alphabet, derive_rng(task.seed, task.size, task.sample)
    )
    process.grow(task.size)
    return process.logical_entropy()


def _spearman(frame: pl.DataFrame, a: str, b: str) -> float | None:
    value = frame.select(pl.corr(a, b, method="spearman")).item()
    if value is None or math.isnan(value):
        return None
    return float(value)


@dataclass(frozen=True)
class EnsembleReport:
    config: dict[str, Any]
    samples: pl.DataFrame
    table: pl.DataFrame
    spearman: float | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "spearman": self.spearman,
            "table": self.table.to_dicts(),
        }


def size_entropy_ensemble(
    config: EnsembleConfig,
    d: Distribution | None = None,
    jobs: int = 1,
) -> EnsembleReport:
    """
    Grow `samples` independent trees to each requested size and tabulate
    the mean and quantiles of their logical entropy per size, plus the
    Spearman coefficient of (size, entropy) over all samples.
    """
    d = _resolve_distribution(config.n, d)
    alphabet = config.resolved_alphabet()
    tasks = [
        _SampleTask(config.seed, size, k, alphabet, d)
        for size in config.sizes
        for k in range(config.samples)
    ]
    logger.info(
        f"ensemble: {len(config.sizes)} sizes x {config.samples} samples on n={config.n}, "
        f"alphabet {alphabet}"
    )
    entropies = map_ordered(_grown_entropy, tasks, jobs)

    samples = pl.DataFrame(
        {
            "size": [t.size for t in tasks],
            "sample": [t.sample for t in tasks],
            "entropy": [float(e) for e in entropies],
        }
    )
    low, mid, high = ENSEMBLE_QUANTILES
    table = (
        samples.group_by("size", maintain_order=True)
        .agg(
            pl.len().alias("samples"),
            pl.col("entropy").mean().alias("mean_entropy"),
            pl.col("entropy").quantile(low, "nearest").alias("q10"),
            pl.col("entropy").quantile(mid, "nearest").alias("q50"),
            pl.col("entropy").quantile(high, "nearest").alias("q90"),
        )
        .sort("size")
    )
    spearman = _spearman(samples, "size", "entropy")
    logger.info(f"ensemble spearman(size, entropy) = {spearman}")
    return EnsembleReport(config.model_dump(mode="json"), samples, table, spearman)


@dataclass(frozen=True)
class ProfileReport:
    config: dict[str, Any]
    entropies: list[Fraction]
    empirical_max: Fraction
    fraction_within: Fraction
    counts: list[int]
    edges: list[float]

    def to_frame(self) -> pl.DataFrame:
        return pl.DataFrame(
            {"bin_low": self.edges[:-1], "bin_high": self.edges[1:], "count": self.counts}
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "empirical_max": format_rational(self.empirical_max),
            "fraction_within": format_rational(self.fraction_within),
            "histogram": {"counts": self.counts, "edges": self.edges},
        }


def entropy_concentration_profile(
    config: ProfileConfig,
    d: Distribution | None = None,
    jobs: int = 1,
) -> ProfileReport:
    """
    Sample trees of exactly `config.size` decision nodes and report the
    histogram of their logical entropy and the fraction within delta of the
    largest entropy observed, i.e. entropy >= (1 - delta) * max.
    """
    d = _resolve_distribution(config.n, d)
    delta = parse_rational(config.delta)
    tasks = [
        _SampleTask(config.seed, config.size, k, config.resolved_alphabet(), d)
        for k in range(config.samples)
    ]
    entropies = map_ordered(_grown_entropy, tasks, jobs)

    top = max(entropies)
    if top == 0:
        within = Fraction(1)
    else:
        threshold = (1 - delta) * top
        within = Fraction(sum(1 for e in entropies if e >= threshold), len(entropies))

    upper = float(max_logical_entropy(d)) or 1.0
    counts, edges = np.histogram(
        [float(e) for e in entropies], bins=PROFILE_HISTOGRAM_BINS, range=(0.0, upper)
    )
    logger.info(
        f"profile at size {config.size}: max {format_rational(top)}, "
        f"{float(within):.3f} within delta {config.delta}"
    )
    return ProfileReport(
        config=config.model_dump(mode="json"),
        entropies=entropies,
        empirical_max=top,
        fraction_within=within,
        counts=[int(c) for c in counts],
        edges=[float(e) for e in edges],
    )
