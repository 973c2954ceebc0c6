"""Analytic cost model over the multiplier configuration space.

Instead of synthesizing designs, every configuration is scored by replaying
the Karatsuba split rule:

* ``base_mult_count``: leaf products, ``3**depth``.
* ``adder_stage_count_worst``: stages for the widest (``2 * width``-bit)
  addition when ``add_base_bits`` are combined per stage.
* ``modeled_bit_ops``: leaf products cost ``leaf_width**2`` bit operations,
  additions and subtractions cost their exact widths.
* ``critical_path_bits``: longest single-cycle carry chain, the larger of a
  leaf product's full ``2 * leaf_width`` output and one adder stage.

The Pareto filter minimizes (base_mult_count, adder_stage_count_worst,
critical_path_bits) among configurations of the same width.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .gemm import arithmetic_intensity
from .wideint import split_width


@dataclass
class DseReport:
    width: int
    mult_base_bits: int
    add_base_bits: int
    recursion_depth: int
    base_mult_count: int
    base_mult_width: int
    adder_stage_count_worst: int
    base_mult_bit_ops: int
    modeled_bit_ops: int
    critical_path_bits: int
    arithmetic_intensity: Fraction | None = None
    pareto_efficient: bool = False

    def objectives(self) -> tuple[int, int, int]:
        return self.base_mult_count, self.adder_stage_count_worst, self.critical_path_bits


def count_base_mults(width: int, base_bits: int) -> tuple[int, int, int]:
    """Return ``(depth, leaf count, leaf width)`` for one multiplier."""
    if width < 1 or base_bits < 2:
        raise ValueError("need width >= 1 and base_bits >= 2")
    depth = 0
    while width > base_bits:
        width = split_width(width)
        depth += 1
    return depth, 3 ** depth, width


def adder_stage_count(add_width: int, add_base_bits: int) -> int:
    if add_width < 1 or add_base_bits < 1:
        raise ValueError("widths must be positive")
    return -(-add_width // add_base_bits)


def karatsuba_addition_bit_ops(width: int, base_bits: int) -> int:
    """Bit operations spent in additions and subtractions of the decomposition.

    Per split of a ``B``-bit product at ``h``: two ``h``-bit half
    differences, two ``(2h+2)``-bit operations forming the middle term, and
    two ``2B``-bit additions for the shifted recombination.
    """
    if width <= base_bits:
        return 0
    h = split_width(width)
    local = 2 * h + 2 * (2 * h + 2) + 2 * (2 * width)
    return local + 3 * karatsuba_addition_bit_ops(h, base_bits)


def schoolbook_bit_ops(width: int) -> int:
    return width * width


def evaluate(width: int, mult_base_bits: int, add_base_bits: int,
             tile: tuple[int, int] | None = None) -> DseReport:
    depth, count, leaf = count_base_mults(width, mult_base_bits)
    leaf_ops = count * leaf * leaf
    return DseReport(
        width=width,
        mult_base_bits=mult_base_bits,
        add_base_bits=add_base_bits,
        recursion_depth=depth,
        base_mult_count=count,
        base_mult_width=leaf,
        adder_stage_count_worst=adder_stage_count(2 * width, add_base_bits),
        base_mult_bit_ops=leaf_ops,
        modeled_bit_ops=leaf_ops + karatsuba_addition_bit_ops(width, mult_base_bits),
        critical_path_bits=max(2 * leaf, add_base_bits),
        arithmetic_intensity=arithmetic_intensity(*tile) if tile else None,
    )


def _dominates(a: tuple, b: tuple) -> bool:
    return all(x <= y for x, y in zip(a, b)) and a != b


def mark_pareto(reports: list[DseReport]) -> list[DseReport]:
    """Set ``pareto_efficient`` on each report, comparing within equal widths."""
    for r in reports:
        r.pareto_efficient = not any(
            o.width == r.width and _dominates(o.objectives(), r.objectives())
            for o in reports
        )
    return reports


def sweep(widths: Iterable[int], mult_bases: Iterable[int], add_bases: Iterable[int],
          tile: tuple[int, int] | None = None) -> list[DseReport]:
    """Score the full cross product of configurations and mark the Pareto front."""
    widths, mult_bases, add_bases = list(widths), list(mult_bases), list(add_bases)
    if not (widths and mult_bases and add_bases):
        raise ValueError("sweep axes must be non-empty")
    reports = [evaluate(w, m, a, tile)
               for w, m, a in itertools.product(widths, mult_bases, add_bases)]
    return mark_pareto(reports)


CSV_FIELDS = [
    "width", "mult_base_bits", "add_base_bits", "recursion_depth", "base_mult_count",
    "base_mult_width", "adder_stage_count_worst", "base_mult_bit_ops", "modeled_bit_ops",
    "critical_path_bits", "arithmetic_intensity", "pareto_efficient",
]
