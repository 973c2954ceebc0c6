"""Fixed-precision arbitrary precision floating point with Karatsuba multiplication."""

from .blas import BlasTrans, blas_gemm
from .core import (
    LimbNumber,
    PackedFloat,
    RangeError,
    fp_add,
    fp_mul,
    fp_mul_add,
    fp_neg,
    fp_sub,
    from_limbs,
    one,
    pack,
    to_limbs,
    unpack,
    zero,
)
from .gemm import GemmConfig, PackedMatrix, arithmetic_intensity, gemm_tiled, partition_rows
from .wideint import MulConfig, WideUint, mul_karatsuba, mul_schoolbook

__version__ = "0.1.0"
