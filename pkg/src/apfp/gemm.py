"""Tiled GEMM ``C <- A @ B + C`` over packed floats.

Output rows are split into contiguous partitions, one per compute unit.
Each unit walks its rows in ``tile_n x tile_m`` output tiles and, for every
``k``, accumulates the outer product of a column slice of ``A`` and a row
slice of ``B`` into the tile. Every output element therefore sees its
products in ascending ``k`` order, which fixes the rounding sequence and
makes the result independent of tile sizes and unit count.
"""

from __future__ import annotations

import random
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    DEFAULT_TOTAL_BITS,
    LIMB_BITS,
    PackedFloat,
    _checked,
    check_total_bits,
    fp_add,
    one,
    random_float,
    zero,
)
from .wideint import MulConfig, karatsuba_kernel


@dataclass(frozen=True)
class GemmConfig:
    """Accelerator configuration.

    ``tile_n``/``tile_m`` are output-tile rows/columns per compute unit,
    ``compute_units`` is the number of row partitions processed in
    parallel, and ``total_bits`` is the packed number width.
    """

    tile_n: int = 32
    tile_m: int = 32
    compute_units: int = 1
    mul_config: MulConfig = field(default_factory=MulConfig)
    total_bits: int = DEFAULT_TOTAL_BITS

    def __post_init__(self):
        if self.tile_n < 1 or self.tile_m < 1:
            raise ValueError("tile sizes must be positive")
        if self.compute_units < 1:
            raise ValueError("compute_units must be positive")
        check_total_bits(self.total_bits)


class PackedMatrix:
    """Dense column-major matrix of PackedFloat with a leading dimension."""

    __slots__ = ("rows", "cols", "ld", "total_bits", "data")

    def __init__(self, rows: int, cols: int, data: list[PackedFloat],
                 ld: int | None = None, total_bits: int = DEFAULT_TOTAL_BITS):
        ld = max(rows, 1) if ld is None else ld
        if rows < 0 or cols < 0:
            raise ValueError("dimensions must be non-negative")
        if ld < max(rows, 1):
            raise ValueError(f"leading dimension {ld} smaller than row count {rows}")
        size = ld * cols if rows else 0
        if len(data) != size:
            raise ValueError(f"storage holds {len(data)} elements, expected {size}")
        self.rows, self.cols, self.ld = rows, cols, ld
        self.total_bits = total_bits
        self.data = data

    @classmethod
    def zeros(cls, rows: int, cols: int, total_bits: int = DEFAULT_TOTAL_BITS) -> PackedMatrix:
        return cls(rows, cols, [zero(total_bits)] * (rows * cols), total_bits=total_bits)

    @classmethod
    def identity(cls, n: int, total_bits: int = DEFAULT_TOTAL_BITS) -> PackedMatrix:
        m = cls.zeros(n, n, total_bits)
        for i in range(n):
            m[i, i] = one(total_bits)
        return m

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[PackedFloat]],
                  total_bits: int | None = None) -> PackedMatrix:
        n = len(rows)
        m = len(rows[0]) if n else 0
        if any(len(r) != m for r in rows):
            raise ValueError("ragged rows")
        if total_bits is None:
            total_bits = rows[0][0].total_bits if n and m else DEFAULT_TOTAL_BITS
        out = cls.zeros(n, m, total_bits)
        for i, row in enumerate(rows):
            for j, x in enumerate(row):
                out[i, j] = x
        return out

    @classmethod
    def random(cls, rows: int, cols: int, rng: random.Random,
               total_bits: int = DEFAULT_TOTAL_BITS,
               exponent_range: tuple[int, int] = (-64, 64)) -> PackedMatrix:
        data = [random_float(rng, total_bits, exponent_range) for _ in range(rows * cols)]
        return cls(rows, cols, data, total_bits=total_bits)

    def __getitem__(self, ij: tuple[int, int]) -> PackedFloat:
        i, j = ij
        return self.data[i + j * self.ld]

    def __setitem__(self, ij: tuple[int, int], value: PackedFloat) -> None:
        i, j = ij
        if value.total_bits != self.total_bits:
            raise ValueError("element width does not match matrix")
        self.data[i + j * self.ld] = value

    def __eq__(self, other):
        if not isinstance(other, PackedMatrix):
            return NotImplemented
        return self.shape == other.shape and self.to_rows() == other.to_rows()

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def to_rows(self) -> list[list[PackedFloat]]:
        return [[self[i, j] for j in range(self.cols)] for i in range(self.rows)]

    def copy(self) -> PackedMatrix:
        return PackedMatrix(self.rows, self.cols, list(self.data), self.ld, self.total_bits)


def partition_rows(n: int, p: int) -> list[range]:
    """Split ``range(n)`` into ``p`` contiguous parts whose sizes differ by at most 1."""
    if n < 0 or p < 1:
        raise ValueError("need n >= 0 and p >= 1")
    q, r = divmod(n, p)
    parts, start = [], 0
    for unit in range(p):
        size = q + (1 if unit < r else 0)
        parts.append(range(start, start + size))
        start += size
    return parts


def arithmetic_intensity(tile_n: int, tile_m: int) -> Fraction:
    """Multiply-adds per operand loaded for a ``tile_n x tile_m`` outer-product tile."""
    if tile_n < 1 or tile_m < 1:
        raise ValueError("tile sizes must be positive")
    return Fraction(tile_n * tile_m, tile_n + tile_m)


def _mul_add_fn(total_bits: int, mult_base_bits: int):
    # Inlined fp_mul followed by fp_add; see core.fp_mul for the normalization argument.
    p = total_bits - LIMB_BITS
    top = 2 * p - 1
    kernel = karatsuba_kernel(p, mult_base_bits)

    def mul_add(a: PackedFloat, b: PackedFloat, c: PackedFloat) -> PackedFloat:
        if a.mantissa == 0 or b.mantissa == 0:
            return c
        product = kernel(a.mantissa, b.mantissa)
        exponent = a.exponent + b.exponent
        if product >> top:
            prod = _checked(a.sign ^ b.sign, exponent, product >> p, total_bits)
        else:
            prod = _checked(a.sign ^ b.sign, exponent - 1, product >> (p - 1), total_bits)
        return fp_add(prod, c)

    return mul_add


def _compute_rows(A: PackedMatrix, B: PackedMatrix, C: PackedMatrix,
                  rows: range, cfg: GemmConfig) -> list[tuple[int, int, PackedFloat]]:
    """One compute unit: all output tiles within ``rows``."""
    mul_add = _mul_add_fn(cfg.total_bits, cfg.mul_config.mult_base_bits)
    K = A.cols
    out = []
    for i0 in range(rows.start, rows.stop, cfg.tile_n):
        i1 = min(i0 + cfg.tile_n, rows.stop)
        for j0 in range(0, B.cols, cfg.tile_m):
            j1 = min(j0 + cfg.tile_m, B.cols)
            tile = [[C[i, j] for j in range(j0, j1)] for i in range(i0, i1)]
            for k in range(K):
                a_col = [A[i, k] for i in range(i0, i1)]
                b_row = [B[k, j] for j in range(j0, j1)]
                for acc, a in zip(tile, a_col):
                    for jj, b in enumerate(b_row):
                        acc[jj] = mul_add(a, b, acc[jj])
            for ii, acc in enumerate(tile):
                for jj, value in enumerate(acc):
                    out.append((i0 + ii, j0 + jj, value))
    return out


def gemm_tiled(A: PackedMatrix, B: PackedMatrix, C: PackedMatrix,
               cfg: GemmConfig = GemmConfig(), executor: Executor | None = None) -> PackedMatrix:
    """Return ``A @ B + C`` computed with outer-product tiling.

    Parameters
    ----------
    A, B, C : PackedMatrix
        Shapes ``N x K``, ``K x M`` and ``N x M``; ``C`` is not modified.
    cfg : GemmConfig
        Tile sizes, compute-unit count and multiplier threshold.
    executor : Executor, optional
        Runs the per-unit row partitions. Defaults to a thread pool with
        ``cfg.compute_units`` workers when there is more than one unit; pass
        a ``ProcessPoolExecutor`` for real parallelism.

    Returns
    -------
    PackedMatrix
        Bit-identical to the naive k-ascending triple loop for every
        configuration.
    """
    if A.cols != B.rows or C.rows != A.rows or C.cols != B.cols:
        raise ValueError(f"non-conformable shapes {A.shape} @ {B.shape} + {C.shape}")
    for m in (A, B, C):
        if m.total_bits != cfg.total_bits:
            raise ValueError(f"matrix width {m.total_bits} != configured {cfg.total_bits}")
    result = C.copy()
    parts = [r for r in partition_rows(A.rows, cfg.compute_units) if len(r)]
    if not parts or not B.cols:
        return result

    def scatter(chunks: Iterable[list[tuple[int, int, PackedFloat]]]) -> None:
        for chunk in chunks:
            for i, j, value in chunk:
                result.data[i + j * result.ld] = value

    if executor is None and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=len(parts)) as pool:
            scatter(pool.map(_compute_rows, *zip(*[(A, B, C, r, cfg) for r in parts])))
    elif executor is not None:
        scatter(executor.map(_compute_rows, *zip(*[(A, B, C, r, cfg) for r in parts])))
    else:
        scatter(_compute_rows(A, B, C, r, cfg) for r in parts)
    return result


def gemm(A: PackedMatrix, B: PackedMatrix, C: PackedMatrix | None = None,
         cfg: GemmConfig | None = None) -> PackedMatrix:
    """Convenience wrapper: ``A @ B + C`` with ``C`` defaulting to zeros."""
    cfg = cfg or GemmConfig(total_bits=A.total_bits)
    if C is None:
        C = PackedMatrix.zeros(A.rows, B.cols, A.total_bits)
    return gemm_tiled(A, B, C, cfg)

