"""
JSON input file models and loaders.

Every loader reports a malformed file as InputFileError naming the path and,
for JSON syntax errors, the character offset.
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, TypeVar

import pydantic
from pydantic import BaseModel, Field, field_validator, model_validator

from codd_lab import logger
from codd_lab.calculus.dtree import DecisionTree, Labeling, check_tree, tree_from_dict, tree_to_dict
from codd_lab.calculus.encoding import EncodedCodd, decode
from codd_lab.calculus.expr import CoddExpr
from codd_lab.calculus.partitions import BitString, Distribution, InputSpace, Partition
from codd_lab.calculus.pattern import ProgramView, RelevanceFn
from codd_lab.core.constants import DEFAULT_FUEL, MAX_INPUT_BITS
from codd_lab.core.exceptions import DecodeError, InputFileError, ValidationError
from codd_lab.utils import format_rational, parse_rational

M = TypeVar("M", bound=BaseModel)


def _check_rational(value: str) -> str:
    parse_rational(value)
    return value


class DistributionFile(BaseModel):
    """{"n": int, "mass": ["p/q", ...]} in numeric input order."""

    n: int = Field(ge=1, le=MAX_INPUT_BITS)
    mass: list[str]

    @field_validator("mass")
    @classmethod
    def _rationals(cls, value: list[str]) -> list[str]:
        return [_check_rational(v) for v in value]

    def to_distribution(self) -> Distribution:
        return Distribution(InputSpace(self.n), tuple(parse_rational(m) for m in self.mass))

    @classmethod
    def from_distribution(cls, d: Distribution) -> "DistributionFile":
        return cls(n=d.space.n, mass=[format_rational(m) for m in d.mass])


class PartitionFile(BaseModel):
    """{"n": int, "cell": [int, ...]}; any labels, canonicalized on load."""

    n: int = Field(ge=1, le=MAX_INPUT_BITS)
    cell: list[int]

    def to_partition(self) -> Partition:
        return Partition.from_labels(InputSpace(self.n), self.cell)


class LabelingFile(BaseModel):
    n: int = Field(ge=1, le=MAX_INPUT_BITS)
    labels: list[int]

    def to_labeling(self) -> Labeling:
        return Labeling(InputSpace(self.n), tuple(self.labels))


class TreeFile(BaseModel):
    n: int = Field(ge=1, le=MAX_INPUT_BITS)
    tree: dict[str, Any]

    def to_tree(self) -> DecisionTree:
        t = tree_from_dict(self.tree)
        check_tree(t, InputSpace(self.n))
        return t

    @classmethod
    def from_tree(cls, t: DecisionTree, n: int) -> "TreeFile":
        return cls(n=n, tree=tree_to_dict(t))


class RelevanceFile(BaseModel):
    """{"n": int, "default_weight": "p/q", "overrides": [[x, y, "p/q"], ...]}."""

    n: int = Field(ge=1, le=MAX_INPUT_BITS)
    default_weight: str = "0"
    overrides: list[tuple[int, int, str]] = Field(default_factory=list)

    @field_validator("default_weight")
    @classmethod
    def _rational(cls, value: str) -> str:
        return _check_rational(value)

    def to_relevance(self) -> RelevanceFn:
        weights: dict[tuple[int, int], Fraction] = {}
        for x, y, w in self.overrides:
            weights[(x, y)] = parse_rational(w)
        return RelevanceFn(InputSpace(self.n), parse_rational(self.default_weight), weights)


class CoddFile(BaseModel):
    """An encoded expression as {"hex": ...} or {"bits": "0101..."}."""

    hex: Optional[str] = None
    bits: Optional[str] = Field(default=None, pattern="^[01]*$")
    n: Optional[int] = Field(default=None, ge=1, le=MAX_INPUT_BITS)

    @model_validator(mode="after")
    def _one_encoding(self) -> "CoddFile":
        if (self.hex is None) == (self.bits is None):
            raise ValueError("exactly one of 'hex' and 'bits' is required")
        return self

    def to_expr(self) -> CoddExpr:
        if self.bits is not None:
            return decode(BitString.from_str(self.bits))
        try:
            data = bytes.fromhex(self.hex)
        except ValueError as e:
            raise DecodeError(0, f"hex text is not valid: {e}")
        return decode(EncodedCodd.from_bytes(data))


def load_model(path: Path, model: type[M]) -> M:
    """
    Read and validate one JSON input file.

    Raises:
        InputFileError: on unreadable files, JSON syntax errors (with the
            character offset) or schema violations
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"Cannot read {path}: {e}")
        raise InputFileError(str(path), None, f"cannot read file: {e.strerror}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputFileError(str(path), e.pos, e.msg)
    try:
        return model.model_validate(data)
    except pydantic.ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "document"
        raise InputFileError(str(path), None, f"{where}: {first['msg']}")


def _convert(path: Path, build):
    # domain errors from a well-formed document still name the file
    try:
        return build()
    except DecodeError as e:
        raise InputFileError(str(path), e.offset, str(e))
    except ValidationError as e:
        raise InputFileError(str(path), None, str(e))


def load_distribution(path: Path) -> Distribution:
    model = load_model(path, DistributionFile)
    return _convert(path, model.to_distribution)


def load_partition(path: Path) -> Partition:
    model = load_model(path, PartitionFile)
    return _convert(path, model.to_partition)


def load_labeling(path: Path) -> Labeling:
    model = load_model(path, LabelingFile)
    return _convert(path, model.to_labeling)


def load_tree(path: Path) -> tuple[DecisionTree, InputSpace]:
    model = load_model(path, TreeFile)
    return _convert(path, model.to_tree), InputSpace(model.n)


def load_relevance(path: Path) -> RelevanceFn:
    model = load_model(path, RelevanceFile)
    return _convert(path, model.to_relevance)


def load_program(path: Path, fuel: int = DEFAULT_FUEL) -> ProgramView:
    """
    Load a program given as a labeling {"n", "labels"}, a tree {"n", "tree"}
    or an encoded CoDD {"n", "hex" | "bits"}.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise InputFileError(str(path), None, f"cannot read file: {e.strerror}")
    except json.JSONDecodeError as e:
        raise InputFileError(str(path), e.pos, e.msg)
    keys = set(data) if isinstance(data, dict) else set()

    if "labels" in keys:
        return ProgramView(load_labeling(path))
    if "tree" in keys:
        t, space = load_tree(path)
        return _convert(path, lambda: ProgramView.from_tree(t, space))
    if keys & {"hex", "bits"}:
        model = load_model(path, CoddFile)
        if model.n is None:
            raise InputFileError(str(path), None, "an encoded program needs 'n' to fix its input space")
        return _convert(path, lambda: ProgramView.from_codd(model.to_expr(), InputSpace(model.n), fuel))
    raise InputFileError(str(path), None, "expected one of 'labels', 'tree', 'hex' or 'bits'")


def read_codd_binary(path: Path) -> CoddExpr:
    """Decode a .bin file holding an encoded expression."""
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        logger.error(f"Cannot read {path}: {e}")
        raise InputFileError(str(path), None, f"cannot read file: {e.strerror}")
    return _convert(path, lambda: decode(EncodedCodd.from_bytes(data)))
