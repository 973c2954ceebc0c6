"""Binary matrix files and a text form for packed floats.

Binary layout (little-endian)::

    8 bytes   magic b"APFPMAT\\0"
    u32       format version (1)
    u64       rows
    u64       cols
    u32       total_bits W of each element
    ...       rows * cols serialized elements, column-major, W/8 bytes each

Text layout: one matrix row per line, whitespace-separated values. Values
are either exact hex ``[-]0x0.<hex>p<exp>`` (the form ``PackedFloat.hex``
writes) or decimals, which are truncated toward zero on input.
"""

from __future__ import annotations

import re
import struct
from fractions import Fraction
from typing import BinaryIO, TextIO

from .core import LIMB_BITS, PackedFloat, check_total_bits, zero
from .gemm import PackedMatrix

MAGIC = b"APFPMAT\0"
VERSION = 1
_HEADER = struct.Struct("<8sIQQI")

_HEX_RE = re.compile(r"^([+-]?)0x0\.([0-9a-fA-F]+)p([+-]?\d+)$")


def write_matrix(fh: BinaryIO, m: PackedMatrix) -> None:
    fh.write(_HEADER.pack(MAGIC, VERSION, m.rows, m.cols, m.total_bits))
    for j in range(m.cols):
        for i in range(m.rows):
            fh.write(m[i, j].to_bytes())


def read_matrix(fh: BinaryIO) -> PackedMatrix:
    header = fh.read(_HEADER.size)
    if len(header) != _HEADER.size:
        raise ValueError("truncated matrix header")
    magic, version, rows, cols, total_bits = _HEADER.unpack(header)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported matrix format version {version}")
    check_total_bits(total_bits)
    size = total_bits // 8
    data = []
    for _ in range(rows * cols):
        chunk = fh.read(size)
        if len(chunk) != size:
            raise ValueError("truncated matrix data")
        data.append(PackedFloat.from_bytes(chunk))
    return PackedMatrix(rows, cols, data, total_bits=total_bits)


def parse_value(text: str, total_bits: int) -> PackedFloat:
    """Parse one text value, truncating decimals toward zero."""
    from .oracle import ExactValue, round_to_zero

    p = total_bits - LIMB_BITS
    match = _HEX_RE.match(text.strip())
    if match:
        sign, digits, exp = match.groups()
        value = Fraction(int(digits, 16), 16 ** len(digits)) * Fraction(2) ** int(exp)
        if sign == "-":
            value = -value
    else:
        value = Fraction(text.strip())
    if value == 0:
        return zero(total_bits)
    if value.denominator & (value.denominator - 1) == 0:
        return round_to_zero(ExactValue.from_fraction(value), p)
    # Non-dyadic decimal: scale so that the truncated integer has more than p bits.
    num, den = abs(value.numerator), value.denominator
    shift = p + den.bit_length() - num.bit_length() + 1
    scaled = (num << shift) // den if shift >= 0 else num // (den << -shift)
    exact = ExactValue(int(value < 0), -shift, scaled)
    return round_to_zero(exact, p)


def read_text(fh: TextIO, total_bits: int) -> PackedMatrix:
    rows = [line.split() for line in fh if line.strip() and not line.lstrip().startswith("#")]
    return PackedMatrix.from_rows([[parse_value(v, total_bits) for v in r] for r in rows],
                                  total_bits=total_bits)


def write_text(fh: TextIO, m: PackedMatrix) -> None:
    for row in m.to_rows():
        fh.write(" ".join(x.hex() for x in row) + "\n")
