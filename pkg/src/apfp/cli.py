"""Command line entry point: benchmarks, design-space sweeps, verification, conversion."""

from __future__ import annotations

import argparse
import csv
import io
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from . import dse, matfile, mpfr_ref
from .core import LIMB_BITS, fp_add, fp_mul, fp_mul_add, random_float, random_operand_pair
from .gemm import GemmConfig, PackedMatrix, gemm_tiled, partition_rows
from .oracle import fp_ref
from .wideint import MulConfig

CSV_SCHEMA_VERSION = 1
DEFAULT_SEED = 42


@dataclass
class BenchResult:
    operation: str
    width: int
    mult_base_bits: int
    add_base_bits: int
    compute_units: int
    hot_operand: bool
    ops: int
    wall_time_s: float
    throughput_ops_per_s: float


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _write_csv(args, name: str, fields: list[str], rows: list[dict]) -> None:
    buf = io.StringIO()
    buf.write(f"# apfp {name} schema v{CSV_SCHEMA_VERSION}\n")
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _mul_worker(width: int, count: int, seed: int, mult_base_bits: int,
                hot: bool) -> tuple[float, float]:
    rng = random.Random(seed)
    cfg = MulConfig(mult_base_bits=mult_base_bits)
    if hot:
        a, b = random_float(rng, width), random_float(rng, width)
        start = time.perf_counter()
        for _ in range(count):
            fp_mul(a, b, cfg)
    else:
        xs = [random_float(rng, width) for _ in range(count)]
        ys = [random_float(rng, width) for _ in range(count)]
        out = [None] * count
        start = time.perf_counter()
        for i in range(count):
            out[i] = fp_mul(xs[i], ys[i], cfg)
    return start, time.perf_counter()


def bench_mul(width: int, count: int, compute_units: int, cfg: MulConfig, seed: int,
              hot: bool) -> BenchResult:
    """Time ``count`` multiplications split over ``compute_units`` worker processes."""
    shares = [len(r) for r in partition_rows(count, compute_units)]
    jobs = [(width, n, seed + unit, cfg.mult_base_bits, hot) for unit, n in enumerate(shares)]
    if compute_units == 1:
        spans = [_mul_worker(*jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=compute_units) as pool:
            list(pool.map(abs, range(compute_units)))  # start workers before timing
            spans = list(pool.map(_mul_worker, *zip(*jobs)))
    wall = max(end for _, end in spans) - min(start for start, _ in spans)
    return BenchResult("fp_mul", width, cfg.mult_base_bits, cfg.add_base_bits, compute_units,
                       hot, count, wall, count / wall if wall > 0 else float("inf"))


def cmd_bench_mul(args) -> int:
    cfg = MulConfig(args.mult_base_bits, args.add_base_bits)
    variants = [True] if args.hot_operand else [False, True]
    rows = [asdict(bench_mul(args.width, args.count, args.compute_units, cfg, args.seed, hot))
            for hot in variants]
    _write_csv(args, "bench-mul", list(BenchResult.__dataclass_fields__), rows)
    return 0


GEMM_FIELDS = ["n", "compute_units", "tile_n", "tile_m", "width", "mult_base_bits",
               "wall_time_s", "mmac_per_s"]


def cmd_bench_gemm(args) -> int:
    cfg = GemmConfig(args.tile_n, args.tile_m, args.compute_units,
                     MulConfig(args.mult_base_bits, args.add_base_bits), args.width)
    rng = random.Random(args.seed)
    rows = []
    pool = ProcessPoolExecutor(args.compute_units) if args.compute_units > 1 else None
    try:
        for n in args.sizes:
            A, B, C = (PackedMatrix.random(n, n, rng, args.width) for _ in range(3))
            start = time.perf_counter()
            gemm_tiled(A, B, C, cfg, executor=pool)
            wall = time.perf_counter() - start
            rows.append({
                "n": n, "compute_units": cfg.compute_units, "tile_n": cfg.tile_n,
                "tile_m": cfg.tile_m, "width": args.width,
                "mult_base_bits": args.mult_base_bits, "wall_time_s": wall,
                "mmac_per_s": n ** 3 / wall / 1e6 if wall > 0 else float("inf"),
            })
    finally:
        if pool is not None:
            pool.shutdown()
    _write_csv(args, "bench-gemm", GEMM_FIELDS, rows)
    return 0


def cmd_dse(args) -> int:
    tile = (args.tile_n, args.tile_m) if args.tile_n and args.tile_m else None
    reports = dse.sweep(args.widths, args.mult_bases, args.add_bases, tile)
    rows = []
    for r in reports:
        row = asdict(r)
        if r.arithmetic_intensity is not None:
            row["arithmetic_intensity"] = str(r.arithmetic_intensity)
        rows.append(row)
    _write_csv(args, "dse", dse.CSV_FIELDS, rows)
    return 0


def verify_report(width: int, trials: int, seed: int, cfg: MulConfig,
                  use_mpfr: bool = True) -> tuple[list[str], int]:
    """Differential check of the core against the exact oracle and MPFR.

    Returns the report lines and the number of mismatches. The report has
    no timing data, so equal arguments give identical reports.
    """
    rng = random.Random(seed)
    ops = {"mul": lambda a, b: fp_mul(a, b, cfg), "add": fp_add}
    counts = {f"oracle {op}": 0 for op in ("mul", "add", "mul_add")}
    mpfr_on = use_mpfr and mpfr_ref.available()
    if mpfr_on:
        counts.update({f"mpfr {op}": 0 for op in ("mul", "add")})
    lines = [
        f"apfp verify report v{CSV_SCHEMA_VERSION}",
        f"width={width} mantissa_bits={width - LIMB_BITS} trials={trials} seed={seed} "
        f"mult_base_bits={cfg.mult_base_bits}",
    ]
    failures: list[str] = []

    def check(label, got, want, *inputs):
        if got == want:
            counts[label] += 1
        else:
            operands = " ".join(x.to_bytes().hex() for x in inputs)
            failures.append(f"MISMATCH {label} inputs={operands} "
                            f"got={got.to_bytes().hex()} want={want.to_bytes().hex()}")

    for _ in range(trials):
        a, b = random_operand_pair(rng, width)
        c = random_float(rng, width)
        for op, fn in ops.items():
            got = fn(a, b)
            check(f"oracle {op}", got, fp_ref(op, a, b), a, b)
            if mpfr_on:
                check(f"mpfr {op}", got, mpfr_ref.mpfr_op(op, a, b), a, b)
        check("oracle mul_add", fp_mul_add(a, b, c, cfg),
              fp_ref("add", fp_ref("mul", a, b), c), a, b, c)
    for label, n in counts.items():
        lines.append(f"{label}: {n}/{trials} match")
    if not mpfr_on:
        reason = "disabled" if not use_mpfr else mpfr_ref.describe()
        lines.append(f"mpfr: skipped ({reason})")
    lines.extend(failures)
    lines.append("result: " + ("PASS" if not failures else f"FAIL ({len(failures)} mismatches)"))
    return lines, len(failures)


def cmd_verify(args) -> int:
    lines, mismatches = verify_report(args.width, args.trials, args.seed,
                                      MulConfig(args.mult_base_bits, args.add_base_bits),
                                      use_mpfr=not args.no_mpfr)
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 1 if mismatches else 0


def cmd_convert(args) -> int:
    if args.direction == "to-binary":
        with open(args.input) as fh:
            m = matfile.read_text(fh, args.width)
        with open(args.output, "wb") as fh:
            matfile.write_matrix(fh, m)
    else:
        with open(args.input, "rb") as fh:
            m = matfile.read_matrix(fh)
        with open(args.output, "w") as fh:
            matfile.write_text(fh, m)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--width", type=int, default=512, help="total bits per number (multiple of 512)")
    common.add_argument("--mult-base-bits", type=int, default=72)
    common.add_argument("--add-base-bits", type=int, default=64)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--csv", metavar="PATH", help="write CSV here instead of stdout")

    parser = argparse.ArgumentParser(prog="apfp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench-mul", parents=[common], help="floating-point multiply throughput")
    p.add_argument("--count", type=int, default=100_000)
    p.add_argument("--compute-units", type=int, default=1)
    p.add_argument("--hot-operand", action="store_true",
                   help="only run the variant that multiplies the same operands repeatedly")
    p.set_defaults(func=cmd_bench_mul)

    p = sub.add_parser("bench-gemm", parents=[common], help="GEMM multiply-add throughput")
    p.add_argument("--sizes", type=_int_list, default=[8, 16, 32])
    p.add_argument("--tile-n", type=int, default=32)
    p.add_argument("--tile-m", type=int, default=32)
    p.add_argument("--compute-units", type=int, default=1)
    p.set_defaults(func=cmd_bench_gemm)

    p = sub.add_parser("dse", parents=[common], help="analytic design-space sweep")
    p.add_argument("--widths", type=_int_list, default=[512])
    p.add_argument("--mult-bases", type=_int_list, default=[18, 36, 72, 144])
    p.add_argument("--add-bases", type=_int_list, default=[32, 64, 128, 256])
    p.add_argument("--tile-n", type=int)
    p.add_argument("--tile-m", type=int)
    p.set_defaults(func=cmd_dse)

    p = sub.add_parser("verify", parents=[common], help="differential test against references")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--output", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--no-mpfr", action="store_true", help="skip the MPFR comparison")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("convert", parents=[common], help="convert between text and binary matrices")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--direction", choices=["to-binary", "to-text"], required=True)
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
