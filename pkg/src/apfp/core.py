"""Packed arbitrary precision floating point with round-to-zero arithmetic.

A value is ``(-1)**sign * 0.m * 2**exponent`` with the mantissa ``m``
normalized so its top bit is set. A number of ``total_bits`` (a multiple of
512) spends one 64-bit word on sign and exponent and the rest on mantissa,
so 512-bit numbers carry 448 mantissa bits.

Serialized layout, little-endian 64-bit words::

    word 0      bits 0..62 exponent (two's complement), bit 63 sign
    word 1..    mantissa, least significant word first
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import NamedTuple

from .wideint import MulConfig, WideUint, karatsuba_kernel, shr_sticky

LIMB_BITS = 64
EXPONENT_BITS = LIMB_BITS - 1
EXP_MIN = -(1 << (EXPONENT_BITS - 1))
EXP_MAX = (1 << (EXPONENT_BITS - 1)) - 1
DEFAULT_TOTAL_BITS = 512

_EXP_MASK = (1 << EXPONENT_BITS) - 1
_DEFAULT_MUL = MulConfig()


class RangeError(ArithmeticError):
    """Exponent or precision outside what the format can hold."""


class PackedFloat(NamedTuple):
    sign: int
    exponent: int
    mantissa: int
    total_bits: int = DEFAULT_TOTAL_BITS

    @property
    def mantissa_bits(self) -> int:
        return self.total_bits - LIMB_BITS

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def to_int(self) -> int:
        """The packed bit pattern as one ``total_bits``-wide integer."""
        head = (self.exponent & _EXP_MASK) | (self.sign << EXPONENT_BITS)
        return head | (self.mantissa << LIMB_BITS)

    def to_bytes(self) -> bytes:
        return self.to_int().to_bytes(self.total_bits // 8, "little")

    @classmethod
    def from_int(cls, packed: int, total_bits: int = DEFAULT_TOTAL_BITS) -> PackedFloat:
        check_total_bits(total_bits)
        if packed < 0 or packed >> total_bits:
            raise ValueError(f"packed value does not fit in {total_bits} bits")
        head = packed & ((1 << LIMB_BITS) - 1)
        exponent = head & _EXP_MASK
        if exponent >> (EXPONENT_BITS - 1):
            exponent -= 1 << EXPONENT_BITS
        return pack(head >> EXPONENT_BITS, exponent, packed >> LIMB_BITS, total_bits)

    @classmethod
    def from_bytes(cls, data: bytes) -> PackedFloat:
        if len(data) % 64:
            raise ValueError(f"serialized size must be a multiple of 64 bytes, got {len(data)}")
        return cls.from_int(int.from_bytes(data, "little"), 8 * len(data))

    def to_fraction(self) -> Fraction:
        if self.mantissa == 0:
            return Fraction(0)
        shift = self.exponent - self.mantissa_bits
        value = Fraction(self.mantissa) * (Fraction(2) ** shift)
        return -value if self.sign else value

    def __float__(self):
        return float(self.to_fraction())

    def hex(self) -> str:
        """Exact text form ``[-]0x0.<hex digits>p<exponent>``."""
        if self.mantissa == 0:
            return "0x0.0p0"
        digits = format(self.mantissa, "x").zfill(self.mantissa_bits // 4)
        return f"{'-' if self.sign else ''}0x0.{digits}p{self.exponent}"


def check_total_bits(total_bits: int) -> None:
    if total_bits < 512 or total_bits % 512:
        raise ValueError(f"total_bits must be a positive multiple of 512, got {total_bits}")


def zero(total_bits: int = DEFAULT_TOTAL_BITS) -> PackedFloat:
    return PackedFloat(0, EXP_MIN, 0, total_bits)


def one(total_bits: int = DEFAULT_TOTAL_BITS) -> PackedFloat:
    return PackedFloat(0, 1, 1 << (total_bits - LIMB_BITS - 1), total_bits)


def pack(sign: int, exponent: int, mantissa: int | WideUint,
         total_bits: int = DEFAULT_TOTAL_BITS) -> PackedFloat:
    """Validate fields and build a PackedFloat.

    A zero mantissa yields canonical zero regardless of sign and exponent.
    Raises RangeError for an exponent outside the 63-bit signed range and
    ValueError for a mantissa that is too wide or not normalized.
    """
    check_total_bits(total_bits)
    p = total_bits - LIMB_BITS
    if isinstance(mantissa, WideUint):
        if mantissa.bits != p:
            raise ValueError(f"mantissa width {mantissa.bits} != {p}")
        mantissa = mantissa.value
    if sign not in (0, 1):
        raise ValueError("sign must be 0 or 1")
    if mantissa == 0:
        return PackedFloat(0, EXP_MIN, 0, total_bits)
    if mantissa < 0 or mantissa.bit_length() != p:
        raise ValueError(f"mantissa must be normalized to exactly {p} bits")
    if not EXP_MIN <= exponent <= EXP_MAX:
        raise RangeError(f"exponent {exponent} outside [{EXP_MIN}, {EXP_MAX}]")
    return PackedFloat(sign, exponent, mantissa, total_bits)


def unpack(x: PackedFloat) -> tuple[int, int, WideUint]:
    return x.sign, x.exponent, WideUint(x.mantissa, x.mantissa_bits)


def _checked(sign: int, exponent: int, mantissa: int, total_bits: int) -> PackedFloat:
    if not EXP_MIN <= exponent <= EXP_MAX:
        raise RangeError(f"result exponent {exponent} outside the 63-bit signed range")
    return PackedFloat(sign, exponent, mantissa, total_bits)


def _same_format(a: PackedFloat, b: PackedFloat) -> int:
    if a.total_bits != b.total_bits:
        raise ValueError(f"format mismatch: {a.total_bits} vs {b.total_bits} bits")
    return a.total_bits


def fp_mul(a: PackedFloat, b: PackedFloat, cfg: MulConfig = _DEFAULT_MUL) -> PackedFloat:
    """Product truncated toward zero to the mantissa width.

    Both significands lie in [1/2, 1), so the exact product lies in
    [1/4, 1) and needs at most a one-bit normalization shift.
    """
    total_bits = _same_format(a, b)
    if a.mantissa == 0 or b.mantissa == 0:
        return PackedFloat(0, EXP_MIN, 0, total_bits)
    p = total_bits - LIMB_BITS
    product = karatsuba_kernel(p, cfg.mult_base_bits)(a.mantissa, b.mantissa)
    exponent = a.exponent + b.exponent
    if product >> (2 * p - 1):
        mantissa = product >> p
    else:
        mantissa = product >> (p - 1)
        exponent -= 1
    return _checked(a.sign ^ b.sign, exponent, mantissa, total_bits)


def fp_add(a: PackedFloat, b: PackedFloat) -> PackedFloat:
    """Sum truncated toward zero to the mantissa width.

    The operand with the larger exponent (then larger mantissa) leads. For
    differing signs the aligned subtrahend keeps one guard bit and a sticky
    bit, which makes the difference equal the floor of the exact
    difference; normalizing that floor truncates exactly like the exact
    result would.
    """
    total_bits = _same_format(a, b)
    if b.mantissa == 0:
        return a
    if a.mantissa == 0:
        return b
    if (b.exponent, b.mantissa) > (a.exponent, a.mantissa):
        a, b = b, a
    p = total_bits - LIMB_BITS
    shift = a.exponent - b.exponent
    if a.sign == b.sign:
        total = a.mantissa + (b.mantissa >> shift if shift < p else 0)
        if total >> p:
            return _checked(a.sign, a.exponent + 1, total >> 1, total_bits)
        return PackedFloat(a.sign, a.exponent, total, total_bits)

    aligned, sticky = shr_sticky(b.mantissa << 1, shift, p + 1)
    diff = (a.mantissa << 1) - aligned - sticky
    if diff == 0:
        return PackedFloat(0, EXP_MIN, 0, total_bits)
    width = diff.bit_length()
    if width >= p:
        mantissa = diff >> (width - p)
    else:
        mantissa = diff << (p - width)
    return _checked(a.sign, a.exponent + width - p - 1, mantissa, total_bits)


def fp_neg(a: PackedFloat) -> PackedFloat:
    if a.mantissa == 0:
        return a
    return a._replace(sign=a.sign ^ 1)


def fp_sub(a: PackedFloat, b: PackedFloat) -> PackedFloat:
    return fp_add(a, fp_neg(b))


def fp_mul_add(a: PackedFloat, b: PackedFloat, c: PackedFloat,
               cfg: MulConfig = _DEFAULT_MUL) -> PackedFloat:
    """``a * b + c`` with the product rounded before the addition."""
    return fp_add(fp_mul(a, b, cfg), c)


class LimbNumber:
    """Limb-based number in the reference software layout.

    ``limbs`` are little-endian 64-bit words of a mantissa occupying
    ``ceil(precision_bits / 64)`` limbs, left-aligned so the top bit of the
    last limb is set for nonzero values. ``sign`` is +1 or -1. Instances are
    mutable so they can serve as output slots for the BLAS interface.
    """

    __slots__ = ("precision_bits", "sign", "exponent", "limbs")

    def __init__(self, precision_bits: int, sign: int = 1, exponent: int = EXP_MIN,
                 limbs: list[int] | None = None):
        if precision_bits < 1:
            raise ValueError("precision_bits must be positive")
        n = -(-precision_bits // LIMB_BITS)
        self.precision_bits = precision_bits
        self.sign = sign
        self.exponent = exponent
        self.limbs = list(limbs) if limbs is not None else [0] * n
        if len(self.limbs) != n:
            raise ValueError(f"expected {n} limbs for {precision_bits} bits, got {len(self.limbs)}")

    def __repr__(self):
        return (f"LimbNumber(precision_bits={self.precision_bits}, sign={self.sign}, "
                f"exponent={self.exponent}, limbs={[hex(w) for w in self.limbs]})")

    def __eq__(self, other):
        if not isinstance(other, LimbNumber):
            return NotImplemented
        return (self.precision_bits, self.sign, self.exponent, self.limbs) == (
            other.precision_bits, other.sign, other.exponent, other.limbs)

    def is_zero(self) -> bool:
        return not any(self.limbs)

    def assign(self, other: LimbNumber) -> None:
        """Overwrite this number in place with ``other``."""
        self.precision_bits = other.precision_bits
        self.sign = other.sign
        self.exponent = other.exponent
        self.limbs = list(other.limbs)


def from_limbs(x: LimbNumber, total_bits: int = DEFAULT_TOTAL_BITS) -> PackedFloat:
    """Left-align a limb mantissa into the packed mantissa field (lossless)."""
    check_total_bits(total_bits)
    p = total_bits - LIMB_BITS
    if x.precision_bits > p:
        raise RangeError(f"precision {x.precision_bits} exceeds {p} mantissa bits")
    value = 0
    for limb in reversed(x.limbs):
        value = (value << LIMB_BITS) | limb
    if value == 0:
        return zero(total_bits)
    value <<= p - LIMB_BITS * len(x.limbs)
    return pack(0 if x.sign > 0 else 1, x.exponent, value, total_bits)


def to_limbs(x: PackedFloat, precision_bits: int) -> LimbNumber:
    """Convert to limb layout, truncating toward zero below the packed width."""
    p = x.mantissa_bits
    if precision_bits > p:
        raise RangeError(f"precision {precision_bits} exceeds {p} mantissa bits")
    out = LimbNumber(precision_bits)
    if x.mantissa == 0:
        return out
    n = len(out.limbs)
    kept = (x.mantissa >> (p - precision_bits)) << (n * LIMB_BITS - precision_bits)
    out.sign = -1 if x.sign else 1
    out.exponent = x.exponent
    out.limbs = [(kept >> (LIMB_BITS * i)) & ((1 << LIMB_BITS) - 1) for i in range(n)]
    return out


def random_float(rng: random.Random, total_bits: int = DEFAULT_TOTAL_BITS,
                 exponent_range: tuple[int, int] = (-64, 64)) -> PackedFloat:
    """Uniform random mantissa with the top bit forced, uniform exponent and sign."""
    p = total_bits - LIMB_BITS
    mantissa = rng.getrandbits(p) | (1 << (p - 1))
    return PackedFloat(rng.getrandbits(1), rng.randint(*exponent_range), mantissa, total_bits)


def random_operand_pair(rng: random.Random, total_bits: int = DEFAULT_TOTAL_BITS,
                        exponent_range: tuple[int, int] = (-64, 64)
                        ) -> tuple[PackedFloat, PackedFloat]:
    """Random pair biased toward the adder's hard cases.

    A quarter of the pairs are independent, a quarter nearly cancel
    (opposite signs, close exponents, shared leading bits), a quarter have
    an exponent gap around the mantissa width so only a sticky bit survives
    alignment, and a quarter share the exponent.
    """
    p = total_bits - LIMB_BITS
    a = random_float(rng, total_bits, exponent_range)
    kind = rng.randrange(4)
    if kind == 0:
        return a, random_float(rng, total_bits, exponent_range)
    if kind == 1:
        noise = rng.getrandbits(rng.randrange(1, p))
        mantissa = (a.mantissa ^ noise) | (1 << (p - 1))
        return a, PackedFloat(a.sign ^ 1, a.exponent + rng.choice((-1, 0, 0, 1)), mantissa, total_bits)
    b = random_float(rng, total_bits, exponent_range)
    if kind == 2:
        b = b._replace(exponent=a.exponent - rng.randint(p - 4, p + 70))
    else:
        b = b._replace(exponent=a.exponent)
    return a, b
