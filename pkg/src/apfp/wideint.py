"""Fixed-width unsigned integers and the Karatsuba mantissa multiplier.

Values are plain Python ints wrapped with an explicit bit width. The
arithmetic helpers mirror what a hardware datapath of that width does:
additions wrap and report a carry, right shifts report a sticky bit, and
multiplication of two ``B``-bit operands produces a ``2B``-bit result.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

WORD_BITS = 64
WORD_MASK = (1 << WORD_BITS) - 1

DEFAULT_MULT_BASE_BITS = 72
DEFAULT_ADD_BASE_BITS = 64


@dataclass(frozen=True, slots=True)
class WideUint:
    """Unsigned integer of a fixed bit width.

    Parameters
    ----------
    value : int
        Integer in ``[0, 2**bits)``.
    bits : int
        Width in bits, at least 1.
    """

    value: int
    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError(f"bit width must be positive, got {self.bits}")
        if self.value < 0 or self.value >> self.bits:
            raise ValueError(f"value does not fit in {self.bits} bits")

    @classmethod
    def from_words(cls, words: Sequence[int], bits: int) -> WideUint:
        """Build from little-endian 64-bit words."""
        value = 0
        for word in reversed(words):
            if word < 0 or word > WORD_MASK:
                raise ValueError(f"word out of range: {word:#x}")
            value = (value << WORD_BITS) | word
        return cls(value, bits)

    @classmethod
    def _unchecked(cls, value: int, bits: int) -> WideUint:
        # For results whose width holds by construction; skips validation.
        obj = object.__new__(cls)
        object.__setattr__(obj, "value", value)
        object.__setattr__(obj, "bits", bits)
        return obj

    @property
    def words(self) -> list[int]:
        v = self.value
        return [(v >> shift) & WORD_MASK for shift in range(0, self.bits, WORD_BITS)]

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value


@dataclass(frozen=True, slots=True)
class SignedMagnitude:
    """Sign bit plus magnitude; zero always carries sign 0."""

    sign: int
    magnitude: WideUint

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError("sign must be 0 or 1")
        if self.sign and self.magnitude.value == 0:
            raise ValueError("zero magnitude must have sign 0")

    def __int__(self):
        return -self.magnitude.value if self.sign else self.magnitude.value


@dataclass(frozen=True, slots=True)
class MulConfig:
    """Karatsuba bottom-out width and bits combined per addition stage."""

    mult_base_bits: int = DEFAULT_MULT_BASE_BITS
    add_base_bits: int = DEFAULT_ADD_BASE_BITS

    def __post_init__(self):
        if self.mult_base_bits < 2:
            raise ValueError("mult_base_bits must be at least 2")
        if self.add_base_bits < 1:
            raise ValueError("add_base_bits must be at least 1")


def _check_same_width(a: WideUint, b: WideUint) -> int:
    if a.bits != b.bits:
        raise ValueError(f"width mismatch: {a.bits} vs {b.bits}")
    return a.bits


def add_staged(a: WideUint, b: WideUint, stage_bits: int) -> tuple[WideUint, int]:
    """Add two same-width values in chunks of ``stage_bits``.

    Each stage adds one chunk plus the incoming carry, like one pipeline
    stage of a partitioned hardware adder. The result does not depend on
    ``stage_bits``.

    Returns
    -------
    sum : WideUint
        ``(a + b) mod 2**B``.
    carry_out : int
        1 if ``a + b >= 2**B``.
    """
    bits = _check_same_width(a, b)
    if stage_bits < 1:
        raise ValueError("stage_bits must be at least 1")
    mask = (1 << stage_bits) - 1
    result = 0
    carry = 0
    for lo in range(0, bits, stage_bits):
        width = min(stage_bits, bits - lo)
        chunk_mask = mask if width == stage_bits else (1 << width) - 1
        s = ((a.value >> lo) & chunk_mask) + ((b.value >> lo) & chunk_mask) + carry
        result |= (s & chunk_mask) << lo
        carry = s >> width
    return WideUint(result, bits), carry


def sub_staged(a: WideUint, b: WideUint, stage_bits: int) -> tuple[WideUint, int]:
    """Subtract in chunks of ``stage_bits``; returns ``(diff, borrow_out)``."""
    bits = _check_same_width(a, b)
    if stage_bits < 1:
        raise ValueError("stage_bits must be at least 1")
    result = 0
    borrow = 0
    for lo in range(0, bits, stage_bits):
        width = min(stage_bits, bits - lo)
        chunk_mask = (1 << width) - 1
        d = ((a.value >> lo) & chunk_mask) - ((b.value >> lo) & chunk_mask) - borrow
        borrow = 1 if d < 0 else 0
        result |= (d & chunk_mask) << lo
    return WideUint(result, bits), borrow


def abs_diff(a: WideUint, b: WideUint) -> SignedMagnitude:
    """``|a - b|`` with sign 1 iff ``a < b``."""
    bits = _check_same_width(a, b)
    if a.value < b.value:
        return SignedMagnitude(1, WideUint(b.value - a.value, bits))
    return SignedMagnitude(0, WideUint(a.value - b.value, bits))


def shift_left(a: WideUint, k: int) -> WideUint:
    if k < 0:
        raise ValueError("shift amount must be non-negative")
    if k >= a.bits:
        return WideUint(0, a.bits)
    return WideUint((a.value << k) & ((1 << a.bits) - 1), a.bits)


def shift_right_sticky(a: WideUint, k: int) -> tuple[WideUint, int]:
    """Logical right shift that also reports whether any 1 bits fell off."""
    if k < 0:
        raise ValueError("shift amount must be non-negative")
    shifted, sticky = shr_sticky(a.value, k, a.bits)
    return WideUint(shifted, a.bits), sticky


def shr_sticky(value: int, k: int, bits: int) -> tuple[int, int]:
    """Int-level right shift with sticky bit; ``bits`` bounds the mask size."""
    if k >= bits:
        return 0, int(value != 0)
    return value >> k, int(value & ((1 << k) - 1) != 0)


def count_leading_zeros(a: WideUint) -> int:
    return a.bits - a.value.bit_length()


def mul_schoolbook(a: WideUint, b: WideUint) -> WideUint:
    """Word-by-word long multiplication with double-width partial products."""
    bits = _check_same_width(a, b)
    aw, bw = a.words, b.words
    n = len(aw)
    acc = [0] * (2 * n)
    for i, ai in enumerate(aw):
        if ai == 0:
            continue
        carry = 0
        for j, bj in enumerate(bw):
            t = acc[i + j] + ai * bj + carry
            acc[i + j] = t & WORD_MASK
            carry = t >> WORD_BITS
        acc[i + n] = carry
    value = 0
    for word in reversed(acc):
        value = (value << WORD_BITS) | word
    return WideUint._unchecked(value, 2 * bits)


def split_width(bits: int) -> int:
    """Width of the low half when splitting a ``bits``-wide operand.

    The high half takes the remaining ``bits - h`` bits, zero-extended to
    ``h`` so that all three sub-products run at the same width.
    """
    return (bits + 1) // 2


class KaratsubaStep(NamedTuple):
    """Intermediate values of one Karatsuba level.

    ``s`` is +1 or -1, the sign of ``(a1 - a0) * (b1 - b0)``; it is +1 when
    ``t`` is zero.
    """

    h: int
    a0: int
    a1: int
    b0: int
    b1: int
    c0: int
    c2: int
    t: int
    s: int
    c1: int
    product: int


def _karatsuba_rec(a: int, b: int, bits: int, base: int) -> int:
    if bits <= base:
        return a * b
    return _karatsuba_level(a, b, bits, base).product


def _karatsuba_level(a: int, b: int, bits: int, base: int) -> KaratsubaStep:
    h = split_width(bits)
    mask = (1 << h) - 1
    a0, a1 = a & mask, a >> h
    b0, b1 = b & mask, b >> h
    c0 = _karatsuba_rec(a0, b0, h, base)
    c2 = _karatsuba_rec(a1, b1, h, base)
    da, db = a1 - a0, b1 - b0
    t = _karatsuba_rec(abs(da), abs(db), h, base)
    s = -1 if t and (da < 0) != (db < 0) else 1
    c1 = c0 + c2 - s * t
    assert 0 <= c1 and c1 >> (2 * h + 2) == 0, "c1 exceeds 2h+2 bits"
    product = c0 + (c1 << h) + (c2 << (2 * h))
    assert product >> (2 * bits) == 0, "product exceeds 2B bits"
    return KaratsubaStep(h, a0, a1, b0, b1, c0, c2, t, s, c1, product)


def karatsuba_trace(a: WideUint, b: WideUint, cfg: MulConfig) -> KaratsubaStep:
    """Top-level decomposition of ``a * b``, computed by dynamic recursion.

    Raises ValueError if the operands are already at or below the bottom-out
    width, since no decomposition takes place there.
    """
    bits = _check_same_width(a, b)
    if bits <= cfg.mult_base_bits:
        raise ValueError("operands do not exceed mult_base_bits; nothing to decompose")
    return _karatsuba_level(a.value, b.value, bits, cfg.mult_base_bits)


def mul_karatsuba_recursive(a: WideUint, b: WideUint, cfg: MulConfig) -> WideUint:
    """Karatsuba product by plain recursion (with overflow assertions)."""
    bits = _check_same_width(a, b)
    return WideUint(_karatsuba_rec(a.value, b.value, bits, cfg.mult_base_bits), 2 * bits)


@lru_cache(maxsize=None)
def karatsuba_kernel(bits: int, mult_base_bits: int) -> Callable[[int, int], int]:
    """Return an int-level multiplier specialized for one width and threshold.

    The recursion is unrolled at build time into straight-line code, the
    way a template recursion is instantiated per width. Leaves at or below
    ``mult_base_bits`` use the native product.
    """
    if bits < 1 or mult_base_bits < 2:
        raise ValueError("invalid kernel parameters")
    lines: list[str] = []
    counter = 0

    def fresh() -> str:
        nonlocal counter
        counter += 1
        return f"v{counter}"

    def emit(x: str, y: str, width: int) -> str:
        out = fresh()
        if width <= mult_base_bits:
            lines.append(f"{out} = {x} * {y}")
            return out
        h = split_width(width)
        mask = (1 << h) - 1
        x0, x1, y0, y1, dx, dy = (fresh() for _ in range(6))
        lines.append(f"{x0} = {x} & {mask}; {x1} = {x} >> {h}")
        lines.append(f"{y0} = {y} & {mask}; {y1} = {y} >> {h}")
        c0 = emit(x0, y0, h)
        c2 = emit(x1, y1, h)
        lines.append(f"{dx} = {x1} - {x0}; {dy} = {y1} - {y0}")
        if h <= mult_base_bits:
            t = emit(f"abs({dx})", f"abs({dy})", h)
        else:
            ax, ay = fresh(), fresh()
            lines.append(f"{ax} = abs({dx}); {ay} = abs({dy})")
            t = emit(ax, ay, h)
        # (dx < 0) != (dy < 0) means s = -1, so c1 = c0 + c2 + t
        lines.append(
            f"{out} = {c0} + ((({c0} + {c2} + {t}) if (({dx} < 0) != ({dy} < 0)) "
            f"else ({c0} + {c2} - {t})) << {h}) + ({c2} << {2 * h})"
        )
        return out

    result = emit("a", "b", bits)
    body = "\n".join(f"    {line}" for line in lines)
    source = f"def karatsuba_{bits}_{mult_base_bits}(a, b):\n{body}\n    return {result}\n"
    namespace: dict = {}
    exec(compile(source, f"<karatsuba {bits}/{mult_base_bits}>", "exec"), namespace)
    return namespace[f"karatsuba_{bits}_{mult_base_bits}"]


def mul_karatsuba(a: WideUint, b: WideUint, cfg: MulConfig = MulConfig()) -> WideUint:
    """Exact ``2B``-bit product via Karatsuba decomposition.

    Operands wider than ``cfg.mult_base_bits`` are split at
    ``h = ceil(B/2)`` into three half-width products (low halves, high
    halves, and the product of absolute half differences with its sign
    tracked separately), then recombined with shifts.
    """
    bits = _check_same_width(a, b)
    return WideUint._unchecked(karatsuba_kernel(bits, cfg.mult_base_bits)(a.value, b.value), 2 * bits)
