"""
CoDD expression nodes.

Every node is hash-consed: building a node structurally equal to a live one
returns the existing object. Equality is therefore identity, a subdag used
twice is stored once, and sizes can be counted over distinct objects.
"""

import re
from enum import IntEnum
from threading import Lock
from typing import Self
from weakref import WeakValueDictionary

from codd_lab.calculus.partitions import BitString
from codd_lab.core.constants import FIELD_MAX
from codd_lab.core.exceptions import CapacityError, InvalidParameterError


class Tag(IntEnum):
    """Node kinds; values are the 3-bit codec tags."""

    LEAF = 0
    DECIDE = 1
    K = 2
    S = 3
    SP = 4
    ENCODE = 5
    DECODE = 6
    APPLY = 7


COMBINATOR_TAGS = (Tag.K, Tag.S, Tag.SP, Tag.ENCODE, Tag.DECODE)


class CoddExpr:
    """
    An immutable, interned CoDD node.

    Leaf carries `output`; Decide carries `bit_index` and children
    (on_zero, on_one); Apply carries children (fn, arg); combinators carry
    nothing.
    """

    __slots__ = ("tag", "output", "bit_index", "children", "__weakref__")

    _table: "WeakValueDictionary[tuple, CoddExpr]" = WeakValueDictionary()
    _lock: Lock = Lock()

    tag: Tag
    output: BitString | None
    bit_index: int | None
    children: tuple["CoddExpr", ...]

    def __new__(
        cls,
        tag: Tag,
        output: BitString | None = None,
        bit_index: int | None = None,
        children: tuple["CoddExpr", ...] = (),
    ) -> Self:
        # children are interned, so their identities stand for their structure
        key = (tag, output, bit_index, tuple(id(c) for c in children))
        with cls._lock:
            node = cls._table.get(key)
            if node is None:
                node = super().__new__(cls)
                object.__setattr__(node, "tag", tag)
                object.__setattr__(node, "output", output)
                object.__setattr__(node, "bit_index", bit_index)
                object.__setattr__(node, "children", children)
                cls._table[key] = node
        return node

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("CoddExpr nodes are immutable")

    def __reduce__(self):
        return (CoddExpr, (self.tag, self.output, self.bit_index, self.children))

    def __repr__(self) -> str:
        return render(self)

    @property
    def on_zero(self) -> "CoddExpr":
        return self.children[0]

    @property
    def on_one(self) -> "CoddExpr":
        return self.children[1]

    @property
    def fn(self) -> "CoddExpr":
        return self.children[0]

    @property
    def arg(self) -> "CoddExpr":
        return self.children[1]

    @property
    def is_leaf(self) -> bool:
        return self.tag == Tag.LEAF


def leaf(output: BitString | str = "") -> CoddExpr:
    if isinstance(output, str):
        output = BitString.from_str(output)
    if len(output) > FIELD_MAX:
        raise CapacityError(f"leaf outputs are limited to {FIELD_MAX} bits")
    return CoddExpr(Tag.LEAF, output=output)


def decide(bit_index: int, on_zero: CoddExpr, on_one: CoddExpr) -> CoddExpr:
    if not 0 <= bit_index <= FIELD_MAX:
        raise InvalidParameterError(f"bit index must be in 0..{FIELD_MAX}, got {bit_index}")
    return CoddExpr(Tag.DECIDE, bit_index=bit_index, children=(on_zero, on_one))


def apply(fn: CoddExpr, arg: CoddExpr) -> CoddExpr:
    return CoddExpr(Tag.APPLY, children=(fn, arg))


def apply_all(fn: CoddExpr, *args: CoddExpr) -> CoddExpr:
    """Curried application fn a1 a2 ... ak."""
    for a in args:
        fn = apply(fn, a)
    return fn


K = CoddExpr(Tag.K)
S = CoddExpr(Tag.S)
SP = CoddExpr(Tag.SP)
ENCODE = CoddExpr(Tag.ENCODE)
DECODE = CoddExpr(Tag.DECODE)

# S K K x = x and S (K S) K f g x = f (g x)
IDENTITY = apply_all(S, K, K)
COMPOSE = apply_all(S, apply(K, S), K)


def spine(e: CoddExpr) -> tuple[CoddExpr, list[CoddExpr]]:
    """Split `h a1 ... ak` into its head h and arguments [a1, ..., ak]."""
    args: list[CoddExpr] = []
    while e.tag == Tag.APPLY:
        args.append(e.arg)
        e = e.fn
    args.reverse()
    return e, args


def canonical_order(root: CoddExpr) -> list[CoddExpr]:
    """
    Distinct nodes in canonical order: depth-first, children first,
    on_zero before on_one and fn before arg. The root comes last.
    """
    order: list[CoddExpr] = []
    seen: set[int] = set()
    stack: list[tuple[CoddExpr, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if expanded:
            seen.add(id(node))
            order.append(node)
            continue
        stack.append((node, True))
        for child in reversed(node.children):
            if id(child) not in seen:
                stack.append((child, False))
    return order


def dag_node_count(e: CoddExpr) -> int:
    """Number of distinct nodes."""
    return len(canonical_order(e))


def unfolded_size(e: CoddExpr) -> int:
    """Node count of the tree obtained by unsharing every subdag."""
    sizes: dict[int, int] = {}
    for node in canonical_order(e):
        sizes[id(node)] = 1 + sum(sizes[id(c)] for c in node.children)
    return sizes[id(e)]


def render(e: CoddExpr) -> str:
    """Readable prefix rendering, e.g. `((S K) K)` or `D0(L[0], L[1])`."""
    match e.tag:
        case Tag.LEAF:
            return f"L[{e.output}]"
        case Tag.DECIDE:
            return f"D{e.bit_index}({render(e.on_zero)}, {render(e.on_one)})"
        case Tag.APPLY:
            return f"({render(e.fn)} {render(e.arg)})"
        case _:
            return e.tag.name


_TOKEN = re.compile(r"\s*(?:(?P<leaf>L\[(?P<bits>[01]*)\])|D(?P<bit>\d+)\(|(?P<name>SP|S|K|ENCODE|DECODE)\b|(?P<punct>[(),]))")


class _Parser:
    """Recursive descent over the `render` syntax; juxtaposition is application."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _error(self, message: str) -> InvalidParameterError:
        return InvalidParameterError(f"cannot parse expression at column {self.pos}: {message}")

    def _peek(self) -> re.Match | None:
        return _TOKEN.match(self.text, self.pos)

    def _expect(self, punct: str) -> None:
        match = self._peek()
        if match is None or match["punct"] != punct:
            raise self._error(f"expected {punct!r}")
        self.pos = match.end()

    def expr(self) -> CoddExpr:
        result = self.atom()
        while (match := self._peek()) is not None and match["punct"] not in (")", ","):
            result = apply(result, self.atom())
        return result

    def atom(self) -> CoddExpr:
        match = self._peek()
        if match is None:
            raise self._error("expected an expression")
        self.pos = match.end()
        if match["leaf"] is not None:
            return leaf(match["bits"])
        if match["bit"] is not None:
            zero = self.expr()
            self._expect(",")
            one = self.expr()
            self._expect(")")
            return decide(int(match["bit"]), zero, one)
        if match["name"] is not None:
            return CoddExpr(Tag[match["name"]])
        if match["punct"] == "(":
            inner = self.expr()
            self._expect(")")
            return inner
        raise self._error(f"unexpected {match['punct']!r}")


def parse_expr(text: str) -> CoddExpr:
    """
    Parse the text form produced by `render`, also accepting unparenthesized
    left-associated applications such as `S K K`.

    Raises:
        InvalidParameterError: on malformed text
    """
    parser = _Parser(text)
    result = parser.expr()
    if text[parser.pos:].strip():
        raise parser._error("trailing input")
    return result
