"""
Input spaces, distributions, partitions and the two entropies.

Inputs of an n-bit space are the integers 0..2**n - 1 in numeric order; bit
position 0 is the most significant bit. Probabilities are exact Fractions so
that logical entropy comparisons never need a tolerance.
"""

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from codd_lab.core.constants import MAX_INPUT_BITS
from codd_lab.core.exceptions import (
    InvalidDistributionError,
    InvalidParameterError,
    InvalidPartitionError,
    SpaceMismatchError,
)


@dataclass(frozen=True, slots=True)
class BitString:
    """An ordered sequence of binary digits, most significant first."""

    bits: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise InvalidParameterError(f"bit strings hold only 0 and 1, got {self.bits}")

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitString":
        if value < 0 or value >= 1 << length:
            raise InvalidParameterError(f"{value} does not fit in {length} bits")
        return cls(tuple((value >> (length - 1 - i)) & 1 for i in range(length)))

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        if any(c not in "01" for c in text):
            raise InvalidParameterError(f"not a bit string: {text!r}")
        return cls(tuple(int(c) for c in text))

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitString":
        return cls(tuple((byte >> (7 - i)) & 1 for byte in data for i in range(8)))

    def to_int(self) -> int:
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value

    def to_bytes(self) -> bytes:
        """Pack into bytes, zero-padding the last byte on the right."""
        padded = self.bits + (0,) * (-len(self.bits) % 8)
        return bytes(
            BitString(padded[i:i + 8]).to_int() for i in range(0, len(padded), 8)
        )

    def bit(self, index: int) -> int:
        """Bit at `index`, reading positions past the end as 0."""
        return self.bits[index] if 0 <= index < len(self.bits) else 0

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True, slots=True)
class InputSpace:
    """The 2**n bit strings of length n, enumerated in numeric order."""

    n: int

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_INPUT_BITS:
            raise InvalidParameterError(
                f"input spaces support 1 <= n <= {MAX_INPUT_BITS}, got n={self.n}"
            )

    @property
    def size(self) -> int:
        return 1 << self.n

    def inputs(self) -> range:
        return range(self.size)

    def bit(self, x: int, index: int) -> int:
        """Bit `index` (0 = most significant) of input `x`."""
        return (x >> (self.n - 1 - index)) & 1

    def bitstring(self, x: int) -> BitString:
        return BitString.from_int(x, self.n)

    def pairs(self) -> Iterator[tuple[int, int]]:
        """All unordered pairs (x, y), x < y."""
        return combinations(self.inputs(), 2)


def check_same_space(a: InputSpace, b: InputSpace) -> None:
    if a != b:
        raise SpaceMismatchError(f"input spaces differ: n={a.n} vs n={b.n}")


@dataclass(frozen=True, slots=True)
class Distribution:
    """Exact probability masses over an input space."""

    space: InputSpace
    mass: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.mass) != self.space.size:
            raise InvalidDistributionError(
                f"expected {self.space.size} masses, got {len(self.mass)}"
            )
        if any(m < 0 for m in self.mass):
            raise InvalidDistributionError("masses must be non-negative")
        if sum(self.mass, Fraction(0)) != 1:
            raise InvalidDistributionError(f"masses sum to {sum(self.mass, Fraction(0))}, not 1")

    @classmethod
    def uniform(cls, space: InputSpace) -> "Distribution":
        return cls(space, (Fraction(1, space.size),) * space.size)

    @classmethod
    def from_weights(cls, space: InputSpace, weights: Sequence[int | Fraction]) -> "Distribution":
        """Normalize non-negative weights (not all zero) into a distribution."""
        weights = [Fraction(w) for w in weights]
        total = sum(weights, Fraction(0))
        if total <= 0:
            raise InvalidDistributionError("weights must have a positive total")
        return cls(space, tuple(w / total for w in weights))


@dataclass(frozen=True, slots=True)
class Partition:
    """
    A total assignment of inputs to cells 0..k-1.

    Cell ids are canonical: numbered by first occurrence in numeric input
    order, so structurally equal partitions compare equal.
    """

    space: InputSpace
    cell: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.cell) != self.space.size:
            raise InvalidPartitionError(
                f"expected {self.space.size} cell ids, got {len(self.cell)}"
            )
        if _canonical_ids(self.cell) != self.cell:
            raise InvalidPartitionError(
                "cell ids must be dense and numbered by first occurrence; "
                "use Partition.from_labels"
            )

    @classmethod
    def from_labels(cls, space: InputSpace, labels: Iterable[object]) -> "Partition":
        """Group inputs with equal labels into one cell."""
        return cls(space, _canonical_ids(tuple(labels)))

    @classmethod
    def discrete(cls, space: InputSpace) -> "Partition":
        return cls(space, tuple(space.inputs()))

    @classmethod
    def indiscrete(cls, space: InputSpace) -> "Partition":
        return cls(space, (0,) * space.size)

    @property
    def num_cells(self) -> int:
        return max(self.cell) + 1

    def blocks(self) -> list[frozenset[int]]:
        """Cells as sets of inputs, indexed by cell id."""
        members: list[set[int]] = [set() for _ in range(self.num_cells)]
        for x, c in enumerate(self.cell):
            members[c].add(x)
        return [frozenset(m) for m in members]


def _canonical_ids(labels: tuple[object, ...]) -> tuple[int, ...]:
    ids: dict[object, int] = {}
    return tuple(ids.setdefault(label, len(ids)) for label in labels)


@dataclass(frozen=True, slots=True)
class DitSet:
    """Unordered pairs of inputs, stored as (x, y) with x < y."""

    pairs: frozenset[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: tuple[int, int]) -> bool:
        x, y = pair
        return (min(x, y), max(x, y)) in self.pairs

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self.pairs))

    def issubset(self, other: "DitSet") -> bool:
        return self.pairs <= other.pairs


def dit_set(p: Partition) -> DitSet:
    """All unordered pairs of inputs lying in different cells."""
    return DitSet(frozenset(
        (x, y) for x, y in p.space.pairs() if p.cell[x] != p.cell[y]
    ))


def cell_masses(p: Partition, d: Distribution) -> list[Fraction]:
    """Probability mass of each cell, indexed by cell id."""
    check_same_space(p.space, d.space)
    masses = [Fraction(0)] * p.num_cells
    for x, c in enumerate(p.cell):
        masses[c] += d.mass[x]
    return masses


def logical_entropy(p: Partition, d: Distribution) -> Fraction:
    """
    Probability that two independent draws from d land in different cells.

    Equals 1 - sum of squared cell masses, computed exactly.
    """
    return 1 - sum((m * m for m in cell_masses(p, d)), Fraction(0))


def max_logical_entropy(d: Distribution) -> Fraction:
    """Logical entropy of the discrete partition, the largest attainable under d."""
    return logical_entropy(Partition.discrete(d.space), d)


def shannon_entropy(p: Partition, d: Distribution) -> float:
    """Shannon entropy in bits of the cell distribution."""
    return shannon_of_masses(cell_masses(p, d))


def shannon_of_masses(masses: Iterable[Fraction]) -> float:
    """Shannon entropy in bits of nonnegative masses, normalized by their total."""
    masses = [m for m in masses if m > 0]
    total = sum(masses, Fraction(0))
    if total == 0:
        return 0.0
    q = np.array([float(m / total) for m in masses], dtype=np.float64)
    entropy = float(-np.sum(q * np.log2(q)))
    # a single cell is exactly 0, not -0.0
    return entropy if entropy > 0 else 0.0



def refines(p1: Partition, p2: Partition) -> bool:
    """True iff every cell of p1 lies inside some cell of p2."""
    check_same_space(p1.space, p2.space)
    image: dict[int, int] = {}
    for c1, c2 in zip(p1.cell, p2.cell):
        if image.setdefault(c1, c2) != c2:
            return False
    return True
