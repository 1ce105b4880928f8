"""
Bit-exact serialization of CoDD expressions.

Layout (all integers big-endian):

    header  node count, 16 bits
    nodes   in canonical order, each a 3-bit tag followed by its payload
              Leaf    16-bit output length, then the output bits
              Decide  16-bit bit index, 16-bit on_zero ref, 16-bit on_one ref
              Apply   16-bit fn ref, 16-bit arg ref
              K, S, Sp, Encode, Decode: no payload
    padding zeros up to the next byte boundary

References index earlier nodes only; the last node is the root.
"""

from dataclasses import dataclass

from codd_lab.calculus.expr import CoddExpr, Tag, apply, canonical_order, decide, leaf
from codd_lab.calculus.partitions import BitString
from codd_lab.core.constants import FIELD_BITS, FIELD_MAX, HEADER_BITS, TAG_BITS
from codd_lab.core.exceptions import CapacityError, DecodeError


@dataclass(frozen=True, slots=True)
class EncodedCodd:
    """The canonical bit string of one expression."""

    bits: BitString

    def to_bytes(self) -> bytes:
        return self.bits.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "EncodedCodd":
        return cls(BitString.from_bytes(data))

    def __len__(self) -> int:
        return len(self.bits)


class BitWriter:
    """Appends fixed-width big-endian fields to a growing bit list."""

    def __init__(self) -> None:
        self._bits: list[int] = []

    def write(self, value: int, width: int) -> None:
        for i in range(width - 1, -1, -1):
            self._bits.append((value >> i) & 1)

    def write_bits(self, bits: BitString) -> None:
        self._bits.extend(bits.bits)

    def pad_to_byte(self) -> None:
        self._bits.extend([0] * (-len(self._bits) % 8))

    def getvalue(self) -> BitString:
        return BitString(tuple(self._bits))


class BitReader:
    """Reads fixed-width fields, reporting the bit offset of any shortfall."""

    def __init__(self, bits: BitString):
        self._bits = bits.bits
        self.offset = 0

    @property
    def remaining(self) -> int:
        return len(self._bits) - self.offset

    def read(self, width: int, what: str) -> int:
        if self.remaining < width:
            raise DecodeError(
                self.offset, f"truncated {what}: needed {width} bits, {self.remaining} left"
            )
        value = 0
        for b in self._bits[self.offset:self.offset + width]:
            value = (value << 1) | b
        self.offset += width
        return value

    def read_bits(self, length: int, what: str) -> BitString:
        if self.remaining < length:
            raise DecodeError(
                self.offset, f"truncated {what}: needed {length} bits, {self.remaining} left"
            )
        chunk = self._bits[self.offset:self.offset + length]
        self.offset += length
        return BitString(chunk)


def encode(e: CoddExpr) -> EncodedCodd:
    """
    Serialize an expression in canonical node order.

    Raises:
        CapacityError: if the dag has more than 65535 distinct nodes
    """
    nodes = canonical_order(e)
    if len(nodes) > FIELD_MAX:
        raise CapacityError(f"expression has {len(nodes)} nodes; the codec holds {FIELD_MAX}")
    index = {id(node): i for i, node in enumerate(nodes)}

    writer = BitWriter()
    writer.write(len(nodes), HEADER_BITS)
    for node in nodes:
        writer.write(node.tag, TAG_BITS)
        match node.tag:
            case Tag.LEAF:
                writer.write(len(node.output), FIELD_BITS)
                writer.write_bits(node.output)
            case Tag.DECIDE:
                writer.write(node.bit_index, FIELD_BITS)
                writer.write(index[id(node.on_zero)], FIELD_BITS)
                writer.write(index[id(node.on_one)], FIELD_BITS)
            case Tag.APPLY:
                writer.write(index[id(node.fn)], FIELD_BITS)
                writer.write(index[id(node.arg)], FIELD_BITS)
    writer.pad_to_byte()
    return EncodedCodd(writer.getvalue())


def _read_ref(reader: BitReader, position: int, what: str) -> int:
    offset = reader.offset
    ref = reader.read(FIELD_BITS, what)
    if ref >= position:
        raise DecodeError(
            offset, f"node {position} refers to node {ref}, which is not an earlier node"
        )
    return ref


def decode(b: EncodedCodd | BitString) -> CoddExpr:
    """
    Rebuild an expression from its encoding.

    Raises:
        DecodeError: on a malformed header, an out-of-range or forward
            reference, or trailing/non-zero padding bits, naming the offset
    """
    bits = b.bits if isinstance(b, EncodedCodd) else b
    reader = BitReader(bits)
    count = reader.read(HEADER_BITS, "header")
    if count == 0:
        raise DecodeError(0, "header declares zero nodes")

    table: list[CoddExpr] = []
    for position in range(count):
        tag = Tag(reader.read(TAG_BITS, f"tag of node {position}"))
        match tag:
            case Tag.LEAF:
                length = reader.read(FIELD_BITS, f"leaf length of node {position}")
                table.append(leaf(reader.read_bits(length, f"leaf bits of node {position}")))
            case Tag.DECIDE:
                bit_index = reader.read(FIELD_BITS, f"bit index of node {position}")
                zero = _read_ref(reader, position, f"on_zero of node {position}")
                one = _read_ref(reader, position, f"on_one of node {position}")
                table.append(decide(bit_index, table[zero], table[one]))
            case Tag.APPLY:
                fn = _read_ref(reader, position, f"fn of node {position}")
                arg = _read_ref(reader, position, f"arg of node {position}")
                table.append(apply(table[fn], table[arg]))
            case _:
                table.append(CoddExpr(tag))

    end = reader.offset
    padding = -end % 8
    if reader.remaining != padding:
        raise DecodeError(end, f"expected {padding} padding bits, found {reader.remaining}")
    if any(bits.bits[end:]):
        raise DecodeError(end, "padding bits must be zero")
    return table[-1]
