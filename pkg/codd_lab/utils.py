"""
Shared helpers: the rational text codec used by every file format, and
seeded random generators derived from a master seed.
"""

from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import TypeVar

import numpy as np

from codd_lab.core.constants import RATIONAL_SEPARATOR

T = TypeVar("T")
R = TypeVar("R")


def format_rational(value: Fraction) -> str:
    """
    Format a rational as "numerator/denominator" in lowest terms.

    Integers are still written with an explicit denominator ("1/1").
    """
    value = Fraction(value)
    return f"{value.numerator}{RATIONAL_SEPARATOR}{value.denominator}"


def parse_rational(text: str) -> Fraction:
    """
    Parse "p/q", an integer, or a finite decimal into an exact Fraction.

    Raises:
        ValueError: if the text is not a rational literal
    """
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not a rational number: {text!r}") from e


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """
    Build an independent generator for one unit of work.

    The stream depends only on the master seed and the integer path (trace
    index, size, sample index, ...), never on scheduling, so results are the
    same for any number of workers.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(path)))


def map_ordered(fn: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> list[R]:
    """
    Apply `fn` to every item, in item order.

    With jobs > 1 the work is spread over a process pool; results are still
    returned in item order, so output never depends on scheduling.
    """
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    chunksize = max(1, len(items) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
