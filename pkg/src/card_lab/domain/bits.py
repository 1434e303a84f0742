"""Big-endian bit packing on top of bitarray."""
from __future__ import annotations

from collections.abc import Sequence

from bitarray import bitarray
from bitarray.util import ba2int, int2ba

from card_lab.domain.exceptions import MalformedCodeword, ParamError


def empty_bits() -> bitarray:
    return bitarray(endian="big")


def int_to_bits(value: int, width: int) -> bitarray:
    """``value`` as exactly ``width`` bits, most significant first."""
    if width < 0 or value < 0 or value >> width:
        raise ParamError(f"Value {value} does not fit in {width} bits")
    if width == 0:
        return empty_bits()
    return int2ba(value, length=width, endian="big")


def bits_to_int(bits: bitarray) -> int:
    if len(bits) == 0:
        return 0
    return ba2int(bits)


class BitWriter:
    """Appends fixed-width fields to a growing bit string."""

    def __init__(self) -> None:
        self._bits = empty_bits()

    def write(self, value: int, width: int) -> None:
        self._bits.extend(int_to_bits(value, width))

    def write_bits(self, bits: bitarray) -> None:
        self._bits.extend(bits)

    def getvalue(self) -> bitarray:
        return self._bits.copy()


class BitReader:
    """Reads fixed-width fields; running past the end raises MalformedCodeword."""

    def __init__(self, bits: bitarray) -> None:
        self._bits = bits
        self._pos = 0

    @property
    def remaining(self) -> int:
        return len(self._bits) - self._pos

    def read_bits(self, width: int) -> bitarray:
        if width > self.remaining:
            raise MalformedCodeword(
                f"Codeword truncated: needed {width} bits at offset {self._pos}, "
                f"{self.remaining} left"
            )
        chunk = self._bits[self._pos : self._pos + width]
        self._pos += width
        return chunk

    def read(self, width: int) -> int:
        return bits_to_int(self.read_bits(width))

    def finish(self) -> None:
        if self.remaining:
            raise MalformedCodeword(f"{self.remaining} trailing bits after codeword")


def pack_fields(values: Sequence[int], widths: Sequence[int]) -> bitarray:
    if len(values) != len(widths):
        raise ParamError(f"Got {len(values)} values for {len(widths)} fields")
    writer = BitWriter()
    for value, width in zip(values, widths):
        writer.write(value, width)
    return writer.getvalue()


def unpack_fields(bits: bitarray, widths: Sequence[int]) -> list[int]:
    reader = BitReader(bits)
    values = [reader.read(width) for width in widths]
    reader.finish()
    return values
