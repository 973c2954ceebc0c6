"""BLAS-style GEMM over caller-owned limb numbers.

Matrices stay in the caller's storage and are reached only through index
functions, the same way the C++ interface takes lambdas returning MPFR
pointers. Storage is column-major with a leading dimension, as in BLAS.
"""

from __future__ import annotations

import enum
from typing import Callable

from .core import LimbNumber, from_limbs, to_limbs
from .gemm import GemmConfig, PackedMatrix, gemm_tiled

ElementAccessor = Callable[[int], LimbNumber]


class BlasTrans(enum.Enum):
    normal = "N"
    transpose = "T"


def gather_matrix(trans: BlasTrans, rows: int, cols: int, index: ElementAccessor,
                  ld: int, total_bits: int) -> PackedMatrix:
    """Convert the logical ``rows x cols`` operand ``op(X)`` to packed form.

    With ``trans=transpose`` the stored matrix is ``cols x rows`` and element
    ``(i, j)`` of the operand is read from stored position ``(j, i)``.
    The returned handle can be reused across several ``blas_gemm`` calls.
    """
    stored_rows = cols if trans is BlasTrans.transpose else rows
    _check_ld(ld, stored_rows)
    out = PackedMatrix.zeros(rows, cols, total_bits)
    for j in range(cols):
        for i in range(rows):
            flat = j + i * ld if trans is BlasTrans.transpose else i + j * ld
            out[i, j] = from_limbs(index(flat), total_bits)
    return out


def scatter_matrix(m: PackedMatrix, index: ElementAccessor, ld: int) -> None:
    """Write ``m`` back into limb storage, keeping each slot's precision."""
    _check_ld(ld, m.rows)
    for j in range(m.cols):
        for i in range(m.rows):
            slot = index(i + j * ld)
            slot.assign(to_limbs(m[i, j], slot.precision_bits))


def _check_ld(ld: int, extent: int) -> None:
    if ld < max(1, extent):
        raise ValueError(f"leading dimension {ld} smaller than {max(1, extent)}")


def blas_gemm(trans_a: BlasTrans, trans_b: BlasTrans, m: int, n: int, k: int,
              index_a: ElementAccessor, lda: int,
              index_b: ElementAccessor, ldb: int,
              index_c: ElementAccessor, ldc: int,
              cfg: GemmConfig = GemmConfig()) -> None:
    """In-place ``C <- op(A) @ op(B) + C`` with ``op(A)`` of shape ``m x k``.

    Operands are gathered through the accessors, multiplied with
    ``gemm_tiled`` and the ``m x n`` result is written back through
    ``index_c``. Accessors are only called from this thread and only for
    indices inside the region described by the extents and leading
    dimensions.

    Raises ValueError on negative dimensions or too-small leading
    dimensions and RangeError when an input precision exceeds the packed
    mantissa width.
    """
    if min(m, n, k) < 0:
        raise ValueError("dimensions must be non-negative")
    trans_a, trans_b = BlasTrans(trans_a), BlasTrans(trans_b)
    _check_ld(lda, k if trans_a is BlasTrans.transpose else m)
    _check_ld(ldb, n if trans_b is BlasTrans.transpose else k)
    _check_ld(ldc, m)
    if m == 0 or n == 0:
        return
    A = gather_matrix(trans_a, m, k, index_a, lda, cfg.total_bits)
    B = gather_matrix(trans_b, k, n, index_b, ldb, cfg.total_bits)
    C = gather_matrix(BlasTrans.normal, m, n, index_c, ldc, cfg.total_bits)
    scatter_matrix(gemm_tiled(A, B, C, cfg), index_c, ldc)
