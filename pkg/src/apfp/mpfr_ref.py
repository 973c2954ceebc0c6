"""Differential reference against GNU MPFR through gmpy2, when installed."""

from __future__ import annotations

from .core import EXP_MIN, LIMB_BITS, PackedFloat, RangeError

try:
    import gmpy2
except ImportError:  # pragma: no cover - depends on environment
    gmpy2 = None


def available() -> bool:
    return gmpy2 is not None


def describe() -> str:
    if gmpy2 is None:
        return "gmpy2 not installed"
    return f"gmpy2 {gmpy2.version()}, {gmpy2.mpfr_version()}"


def _context(precision: int):
    return gmpy2.context(precision=precision, round=gmpy2.RoundToZero,
                         emax=gmpy2.get_emax_max(), emin=gmpy2.get_emin_min())


def to_mpfr(x: PackedFloat):
    p = x.total_bits - LIMB_BITS
    with _context(p):
        if x.mantissa == 0:
            return gmpy2.mpfr(0)
        value = gmpy2.mul_2exp(gmpy2.mpfr(x.mantissa), x.exponent - p)
        return -value if x.sign else value


def from_mpfr(value, total_bits: int) -> PackedFloat:
    p = total_bits - LIMB_BITS
    if value == 0:
        return PackedFloat(0, EXP_MIN, 0, total_bits)
    mant, exp = value.as_mantissa_exp()
    mant, exp = int(mant), int(exp)
    sign = int(mant < 0)
    mant = abs(mant)
    n = mant.bit_length()
    if n > p:
        raise RangeError("MPFR value carries more bits than the packed mantissa")
    return PackedFloat(sign, exp + n, mant << (p - n), total_bits)


def mpfr_op(op: str, a: PackedFloat, b: PackedFloat) -> PackedFloat:
    """Apply ``add`` or ``mul`` in MPFR with round-to-zero at the packed precision."""
    if gmpy2 is None:
        raise RuntimeError("gmpy2 is required for MPFR comparisons")
    p = a.total_bits - LIMB_BITS
    x, y = to_mpfr(a), to_mpfr(b)
    with _context(p):
        if op == "add":
            r = x + y
        elif op == "mul":
            r = x * y
        else:
            raise ValueError(f"unknown op {op!r}")
    return from_mpfr(r, a.total_bits)
