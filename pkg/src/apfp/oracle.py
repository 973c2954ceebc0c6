"""Exact reference arithmetic for differential testing.

Nothing here touches the Karatsuba kernel or the packed adder. Values are
lifted to unbounded integers scaled by a power of two, combined exactly, and
truncated once at the end.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import EXP_MAX, EXP_MIN, LIMB_BITS, PackedFloat, RangeError


@dataclass(frozen=True)
class ExactValue:
    """``(-1)**sign * significand * 2**exponent`` with no width limit."""

    sign: int
    exponent: int
    significand: int

    @classmethod
    def from_packed(cls, x: PackedFloat) -> ExactValue:
        if x.mantissa == 0:
            return cls(0, 0, 0)
        return cls(x.sign, x.exponent - (x.total_bits - LIMB_BITS), x.mantissa)

    @classmethod
    def from_fraction(cls, value: Fraction) -> ExactValue:
        """Exact only for dyadic rationals; other values raise ValueError."""
        value = Fraction(value)
        den = value.denominator
        if den & (den - 1):
            raise ValueError(f"{value} is not a dyadic rational")
        return cls(int(value < 0), -(den.bit_length() - 1), abs(value.numerator))

    def to_fraction(self) -> Fraction:
        value = Fraction(self.significand) * Fraction(2) ** self.exponent
        return -value if self.sign else value


def exact_mul(a: ExactValue, b: ExactValue) -> ExactValue:
    return ExactValue(a.sign ^ b.sign, a.exponent + b.exponent, a.significand * b.significand)


def exact_add(a: ExactValue, b: ExactValue) -> ExactValue:
    e = min(a.exponent, b.exponent)
    x = a.significand << (a.exponent - e)
    y = b.significand << (b.exponent - e)
    total = (-x if a.sign else x) + (-y if b.sign else y)
    return ExactValue(int(total < 0), e, abs(total))


def round_to_zero(x: ExactValue, mantissa_bits: int) -> PackedFloat:
    """The representable value nearest ``x`` that is not larger in magnitude."""
    total_bits = mantissa_bits + LIMB_BITS
    if x.significand == 0:
        return PackedFloat(0, EXP_MIN, 0, total_bits)
    n = x.significand.bit_length()
    if n > mantissa_bits:
        mantissa = x.significand >> (n - mantissa_bits)
    else:
        mantissa = x.significand << (mantissa_bits - n)
    exponent = x.exponent + n
    if not EXP_MIN <= exponent <= EXP_MAX:
        raise RangeError(f"exponent {exponent} outside the 63-bit signed range")
    return PackedFloat(x.sign, exponent, mantissa, total_bits)


def fp_ref(op: str, a: PackedFloat, b: PackedFloat) -> PackedFloat:
    """Ground truth for ``fp_add``/``fp_mul``: exact result, truncated once."""
    if a.total_bits != b.total_bits:
        raise ValueError("format mismatch")
    ea, eb = ExactValue.from_packed(a), ExactValue.from_packed(b)
    if op == "add":
        exact = exact_add(ea, eb)
    elif op == "mul":
        exact = exact_mul(ea, eb)
    else:
        raise ValueError(f"unknown op {op!r}")
    return round_to_zero(exact, a.total_bits - LIMB_BITS)


def gemm_naive(A, B, C):
    """Triple loop ``C + A @ B`` with k-ascending accumulation per element.

    Accepts and returns ``PackedMatrix`` objects; each multiply and each
    add is rounded separately, like the multiply-add pipeline.
    """
    from .gemm import PackedMatrix

    if A.cols != B.rows or C.rows != A.rows or C.cols != B.cols:
        raise ValueError("non-conformable matrices")
    out = PackedMatrix.zeros(C.rows, C.cols, C.total_bits)
    for i in range(A.rows):
        for j in range(B.cols):
            acc = C[i, j]
            for k in range(A.cols):
                acc = fp_ref("add", fp_ref("mul", A[i, k], B[k, j]), acc)
            out[i, j] = acc
    return out
