"""
The distinction-based pattern calculus.

P is a pattern in F relative to a relevance function rho when P makes every
distinction of F that rho marks relevant while making strictly fewer
distinctions overall. Programs are compared extensionally on one input
space, through the pairs of inputs they send to different outputs.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from codd_lab import logger
from codd_lab.calculus.codd import codd_labeling
from codd_lab.calculus.dtree import DecisionTree, Labeling, optimal_tree, tree_labeling
from codd_lab.calculus.expr import CoddExpr
from codd_lab.calculus.partitions import (
    Distribution,
    DitSet,
    InputSpace,
    check_same_space,
    dit_set,
)
from codd_lab.core.constants import DEFAULT_FUEL
from codd_lab.core.exceptions import (
    InvalidParameterError,
    UndefinedIntensityError,
)
from codd_lab.utils import format_rational


@dataclass(frozen=True, slots=True)
class ProgramView:
    """A program seen as the labeling it computes, plus its distinctions."""

    labeling: Labeling
    dits: DitSet = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "dits", dit_set(self.labeling.partition()))

    @property
    def space(self) -> InputSpace:
        return self.labeling.space

    @classmethod
    def from_labeling(cls, labeling: Labeling) -> "ProgramView":
        return cls(labeling)

    @classmethod
    def from_table(cls, space: InputSpace, outputs: Sequence[int]) -> "ProgramView":
        return cls(Labeling(space, tuple(outputs)))

    @classmethod
    def from_tree(cls, t: DecisionTree, space: InputSpace) -> "ProgramView":
        return cls(tree_labeling(t, space))

    @classmethod
    def from_codd(cls, e: CoddExpr, space: InputSpace, fuel: int = DEFAULT_FUEL) -> "ProgramView":
        return cls(codd_labeling(e, space, fuel))


def _pair(x: int, y: int) -> tuple[int, int]:
    return (x, y) if x < y else (y, x)


@dataclass(frozen=True)
class RelevanceFn:
    """
    Non-negative weights on unordered input pairs.

    Pairs not listed in `overrides` get `default_weight`. A pair is relevant
    when its weight is positive.
    """

    space: InputSpace
    default_weight: Fraction = Fraction(0)
    overrides: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.default_weight < 0:
            raise InvalidParameterError("relevance weights must be non-negative")
        normalized: dict[tuple[int, int], Fraction] = {}
        for (x, y), w in self.overrides.items():
            if x == y or not (0 <= x < self.space.size and 0 <= y < self.space.size):
                raise InvalidParameterError(f"({x}, {y}) is not a pair of distinct inputs")
            if w < 0:
                raise InvalidParameterError(f"weight of ({x}, {y}) is negative")
            key = _pair(x, y)
            if key in normalized and normalized[key] != w:
                raise InvalidParameterError(f"conflicting weights for pair {key}")
            normalized[key] = Fraction(w)
        object.__setattr__(self, "overrides", normalized)

    @classmethod
    def all_relevant(cls, space: InputSpace, weight: Fraction = Fraction(1)) -> "RelevanceFn":
        return cls(space, Fraction(weight))

    @classmethod
    def none_relevant(cls, space: InputSpace) -> "RelevanceFn":
        return cls(space, Fraction(0))

    @classmethod
    def from_predicate(cls, space: InputSpace, relevant, weight: Fraction = Fraction(1)) -> "RelevanceFn":
        """Weight `weight` on pairs where `relevant(x, y)` holds, 0 elsewhere."""
        return cls(space, Fraction(0), {
            (x, y): Fraction(weight) for x, y in space.pairs() if relevant(x, y)
        })

    def weight(self, x: int, y: int) -> Fraction:
        return self.overrides.get(_pair(x, y), self.default_weight)

    def is_relevant(self, x: int, y: int) -> bool:
        return self.weight(x, y) > 0

    def total_weight(self) -> Fraction:
        pair_count = self.space.size * (self.space.size - 1) // 2
        return (
            self.default_weight * (pair_count - len(self.overrides))
            + sum(self.overrides.values(), Fraction(0))
        )

    def relevant_pairs(self) -> DitSet:
        return DitSet(frozenset(p for p in self.space.pairs() if self.is_relevant(*p)))


@dataclass(frozen=True, slots=True)
class PatternVerdict:
    is_pattern: bool
    dits_F: int
    dits_P: int
    missed_relevant: int
    intensity: Fraction | None
    runtime_refines: bool | None = None
    runtime_factor: Fraction | None = None

    def to_dict(self) -> dict[str, Any]:
        def rational(value: Fraction | None) -> str | None:
            return None if value is None else format_rational(value)

        return {
            "is_pattern": self.is_pattern,
            "dits_F": self.dits_F,
            "dits_P": self.dits_P,
            "missed_relevant": self.missed_relevant,
            "intensity": rational(self.intensity),
            "runtime_refines": self.runtime_refines,
            "runtime_factor": rational(self.runtime_factor),
        }


def program_dits(F: ProgramView) -> DitSet:
    """Pairs of inputs F sends to different outputs."""
    return F.dits


def _missed_relevant(P: ProgramView, F: ProgramView, rho: RelevanceFn) -> list[tuple[int, int]]:
    check_same_space(P.space, F.space)
    check_same_space(F.space, rho.space)
    return [pair for pair in F.dits if rho.is_relevant(*pair) and pair not in P.dits]


def pattern_intensity(P: ProgramView, F: ProgramView, rho: RelevanceFn) -> Fraction:
    """
    Degree to which P is a pattern in F:

        max(0, (|F| - |P|) / |F|) * (w(rho) - w(missed)) / w(rho)

    where |.| counts distinctions and w(missed) is the weight of the relevant
    distinctions of F that P does not make.

    Raises:
        UndefinedIntensityError: if F is constant or rho has zero total weight
    """
    missed = _missed_relevant(P, F, rho)
    total = rho.total_weight()
    if len(F.dits) == 0:
        raise UndefinedIntensityError("intensity is undefined for a constant F")
    if total == 0:
        raise UndefinedIntensityError("intensity is undefined for an all-zero relevance function")
    simplification = max(Fraction(0), Fraction(len(F.dits) - len(P.dits), len(F.dits)))
    missed_weight = sum((rho.weight(*pair) for pair in missed), Fraction(0))
    return simplification * (total - missed_weight) / total


def _intensity_or_none(P: ProgramView, F: ProgramView, rho: RelevanceFn) -> Fraction | None:
    try:
        return pattern_intensity(P, F, rho)
    except UndefinedIntensityError:
        return None


def runtime_refines(P: ProgramView, F: ProgramView, d: Distribution) -> tuple[bool, Fraction]:
    """
    Compare the minimal average depths of optimal trees for P and F.

    Returns (depth(P) < depth(F), depth(F) / max(depth(P), 2**-n)).

    Raises:
        CapacityError: if the space is too large for optimal_tree
    """
    check_same_space(P.space, F.space)
    depth_p = optimal_tree(P.labeling, d).average_depth
    depth_f = optimal_tree(F.labeling, d).average_depth
    floor = Fraction(1, P.space.size)
    return depth_p < depth_f, depth_f / max(depth_p, floor)


def _verdict(
    holds: bool,
    P: ProgramView,
    F: ProgramView,
    rho: RelevanceFn,
    missed: list[tuple[int, int]],
    d: Distribution | None,
) -> PatternVerdict:
    refined, factor = runtime_refines(P, F, d) if d is not None else (None, None)
    return PatternVerdict(
        is_pattern=holds,
        dits_F=len(F.dits),
        dits_P=len(P.dits),
        missed_relevant=len(missed),
        intensity=_intensity_or_none(P, F, rho),
        runtime_refines=refined,
        runtime_factor=factor,
    )


def is_pattern(
    P: ProgramView,
    F: ProgramView,
    rho: RelevanceFn,
    d: Distribution | None = None,
) -> PatternVerdict:
    """
    P covers every relevant distinction of F and makes strictly fewer
    distinctions. With a distribution, the runtime comparison is filled in.
    """
    missed = _missed_relevant(P, F, rho)
    holds = not missed and len(P.dits) < len(F.dits)
    logger.debug(f"is_pattern: |F|={len(F.dits)} |P|={len(P.dits)} missed={len(missed)} -> {holds}")
    return _verdict(holds, P, F, rho, missed, d)


def is_approx_pattern(
    P: ProgramView,
    F: ProgramView,
    rho: RelevanceFn,
    slack: int,
    d: Distribution | None = None,
) -> PatternVerdict:
    """
    P makes at least `slack` fewer distinctions than F and misses fewer than
    `slack` of F's relevant distinctions.

    Raises:
        InvalidParameterError: if slack < 1
    """
    if slack < 1:
        raise InvalidParameterError(f"slack must be at least 1, got {slack}")
    missed = _missed_relevant(P, F, rho)
    holds = len(F.dits) - len(P.dits) >= slack and len(missed) < slack
    return _verdict(holds, P, F, rho, missed, d)
