import itertools
import random

import pytest

from apfp.blas import BlasTrans, blas_gemm, gather_matrix, scatter_matrix
from apfp.core import LimbNumber, RangeError, from_limbs, to_limbs
from apfp.gemm import GemmConfig, PackedMatrix
from apfp.oracle import gemm_naive


def store(m: PackedMatrix, ld: int, precision: int = 448, transpose: bool = False):
    """Column-major limb storage of ``m`` (or of its transpose) with padding rows."""
    rows, cols = (m.cols, m.rows) if transpose else (m.rows, m.cols)
    buf = [LimbNumber(precision, exponent=-999, limbs=None) for _ in range(ld * cols)]
    for j in range(cols):
        for i in range(rows):
            x = m[j, i] if transpose else m[i, j]
            buf[i + j * ld] = to_limbs(x, precision)
    return buf


class Recorder:
    def __init__(self, buf, rows, cols, ld):
        self.buf, self.rows, self.cols, self.ld = buf, rows, cols, ld
        self.calls = []

    def __call__(self, idx):
        assert idx % self.ld < self.rows and idx // self.ld < self.cols, idx
        self.calls.append(idx)
        return self.buf[idx]


def to_packed(buf, rows, cols, ld):
    return gather_matrix(BlasTrans.normal, rows, cols, buf.__getitem__, ld, 512)


def mats(m, n, k, seed):
    rng = random.Random(seed)
    return (PackedMatrix.random(m, k, rng), PackedMatrix.random(k, n, rng),
            PackedMatrix.random(m, n, rng))


def test_zero_dimensions_make_no_calls():
    def never(idx):
        raise AssertionError("accessor called")

    blas_gemm(BlasTrans.normal, BlasTrans.normal, 0, 0, 0, never, 1, never, 1, never, 1)


def test_normal_normal_matches_naive():
    A, B, C = mats(3, 4, 2, seed=1)
    a, b, c = store(A, 5), store(B, 2), store(C, 4)
    blas_gemm(BlasTrans.normal, BlasTrans.normal, 3, 4, 2,
              a.__getitem__, 5, b.__getitem__, 2, c.__getitem__, 4, GemmConfig(2, 2))
    assert to_packed(c, 3, 4, 4) == gemm_naive(A, B, C)


@pytest.mark.parametrize("ta,tb", list(itertools.product(BlasTrans, BlasTrans)))
def test_transpose_consistency(ta, tb):
    m, n, k = 4, 3, 5
    A, B, C = mats(m, n, k, seed=2)
    a_t, b_t = ta is BlasTrans.transpose, tb is BlasTrans.transpose
    lda = (k if a_t else m) + 1
    ldb = (n if b_t else k) + 2
    a = Recorder(store(A, lda, transpose=a_t), k if a_t else m, m if a_t else k, lda)
    b = Recorder(store(B, ldb, transpose=b_t), n if b_t else k, k if b_t else n, ldb)
    c_buf = store(C, m)
    c = Recorder(c_buf, m, n, m)
    blas_gemm(ta, tb, m, n, k, a, lda, b, ldb, c, m, GemmConfig(3, 2))
    assert to_packed(c_buf, m, n, m) == gemm_naive(A, B, C)
    assert a.calls and b.calls and c.calls


def test_string_flags_accepted():
    A, B, C = mats(2, 2, 2, seed=3)
    a, b, c = store(A, 2), store(B, 2), store(C, 2)
    blas_gemm("N", "N", 2, 2, 2, a.__getitem__, 2, b.__getitem__, 2, c.__getitem__, 2)
    assert to_packed(c, 2, 2, 2) == gemm_naive(A, B, C)


def test_layout_does_not_leak():
    m, n, k = 3, 3, 4
    A, B, C = mats(m, n, k, seed=4)
    a1, b1, c1 = store(A, m), store(B, k), store(C, m)
    blas_gemm(BlasTrans.normal, BlasTrans.normal, m, n, k,
              a1.__getitem__, m, b1.__getitem__, k, c1.__getitem__, m)

    # Same logical matrices behind a scrambled backing store.
    perm = list(range(100))
    random.Random(0).shuffle(perm)

    def scrambled(buf, ld):
        backing = {perm[i]: x for i, x in enumerate(buf)}
        return (lambda idx: backing[perm[idx]]), ld

    a2, lda2 = scrambled(store(A, m + 3), m + 3)
    b2, ldb2 = scrambled(store(B, k + 1), k + 1)
    c_buf = store(C, m + 2)
    c2, ldc2 = scrambled(c_buf, m + 2)
    blas_gemm(BlasTrans.normal, BlasTrans.normal, m, n, k, a2, lda2, b2, ldb2, c2, ldc2)
    assert to_packed(c_buf, m, n, m + 2) == to_packed(c1, m, n, m)


def test_results_written_at_each_slots_precision():
    A, B, C = mats(2, 2, 2, seed=5)
    a, b = store(A, 2), store(B, 2)
    c = store(C, 2, precision=130)
    blas_gemm("N", "N", 2, 2, 2, a.__getitem__, 2, b.__getitem__, 2, c.__getitem__, 2)
    C130 = to_packed(c, 2, 2, 2)
    full = gemm_naive(A, B, to_packed(store(C, 2, precision=130), 2, 2, 2))
    for i in range(2):
        for j in range(2):
            assert c[i + 2 * j].precision_bits == 130
            assert C130[i, j] == from_limbs(to_limbs(full[i, j], 130))


def test_precision_too_large():
    A, B, C = mats(1, 1, 1, seed=6)
    a = [LimbNumber(512, 1, 1, [0] * 7 + [1 << 63])]
    b, c = store(B, 1), store(C, 1)
    with pytest.raises(RangeError):
        blas_gemm("N", "N", 1, 1, 1, a.__getitem__, 1, b.__getitem__, 1, c.__getitem__, 1)


@pytest.mark.parametrize("lda,ldb,ldc", [(1, 2, 2), (2, 1, 2), (2, 2, 1)])
def test_leading_dimension_too_small(lda, ldb, ldc):
    def dummy(idx):
        return LimbNumber(64)

    with pytest.raises(ValueError):
        blas_gemm("N", "N", 2, 2, 2, dummy, lda, dummy, ldb, dummy, ldc)


def test_negative_dimension():
    with pytest.raises(ValueError):
        blas_gemm("N", "N", -1, 1, 1, None, 1, None, 1, None, 1)


def test_handles_can_be_reused():
    A, B, C = mats(2, 3, 2, seed=7)
    a = store(A, 2)
    handle = gather_matrix(BlasTrans.normal, 2, 2, a.__getitem__, 2, 512)
    assert handle == A
    out = store(C, 2)
    scatter_matrix(handle, out.__getitem__, 2)
    assert to_packed(out, 2, 2, 2) == A
