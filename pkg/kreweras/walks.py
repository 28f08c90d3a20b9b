"""
Brute-force quadrant walk counts and the closed-form count evaluators.
"""

import csv
import logging
from math import comb
from typing import Dict, List, Optional, TextIO, Tuple

from kreweras.series import BSeries

logger = logging.getLogger("Kreweras.walks")

KREWERAS_STEPS = ((1, 1), (-1, 0), (0, -1))  # NE, W, S
SQUARE_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))  # E, W, N, S


# ============================================================================
# Walk Tables
# ============================================================================
class WalkTable:
    """Counts a_{i,j}(n) of quadrant walks of length n from the origin to (i, j)."""

    def __init__(self, n_max: int, grids: List[List[List[int]]]):
        self.n_max = n_max
        self._grids = grids

    def count(self, i: int, j: int, n: int) -> int:
        if n < 0 or n > self.n_max or i < 0 or j < 0:
            return 0
        grid = self._grids[n]
        if i >= len(grid) or j >= len(grid):
            return 0
        return grid[i][j]

    def slice(self, n: int) -> Dict[Tuple[int, int], int]:
        """Non-zero counts at length n as {(i, j): count}."""
        grid = self._grids[n]
        return {
            (i, j): value
            for i, row in enumerate(grid)
            for j, value in enumerate(row)
            if value
        }

    @property
    def counts(self) -> List[Dict[Tuple[int, int], int]]:
        return [self.slice(n) for n in range(self.n_max + 1)]

    def row_total(self, n: int) -> int:
        """Number of walks of length n, wherever they end."""
        return sum(sum(row) for row in self._grids[n])

    def to_csv(self, stream: TextIO, n_min: int = 0, n_max: Optional[int] = None) -> int:
        """Write the non-zero counts with columns n, i, j, count; returns the row count."""
        last = self.n_max if n_max is None else min(n_max, self.n_max)
        writer = csv.writer(stream)
        writer.writerow(["n", "i", "j", "count"])
        rows = 0
        for n in range(n_min, last + 1):
            for (i, j), value in sorted(self.slice(n).items()):
                writer.writerow([n, i, j, value])
                rows += 1
        return rows


def build_walk_table(n_max: int) -> WalkTable:
    """
    Exact Kreweras counts by dynamic programming over the steps NE, W, S.

    The grid has one row and column of sentinel zeros past n_max so that the
    W and S predecessors (i+1, j) and (i, j+1) are always addressable.
    """
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    size = n_max + 2
    first = [[0] * size for _ in range(size)]
    first[0][0] = 1
    grids = [first]
    for n in range(1, n_max + 1):
        prev = grids[-1]
        grid = [[0] * size for _ in range(size)]
        for i in range(size - 1):
            for j in range(size - 1):
                value = prev[i + 1][j] + prev[i][j + 1]
                if i and j:
                    value += prev[i - 1][j - 1]
                grid[i][j] = value
        grids.append(grid)
    logger.debug(f"walk table built up to n = {n_max}")
    return WalkTable(n_max, grids)


def square_lattice_table(n_max: int) -> WalkTable:
    """Quadrant walks with the four unit steps N, S, E, W."""
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    size = n_max + 2
    first = [[0] * size for _ in range(size)]
    first[0][0] = 1
    grids = [first]
    for _ in range(n_max):
        prev = grids[-1]
        grid = [[0] * size for _ in range(size)]
        for i in range(size - 1):
            for j in range(size - 1):
                value = prev[i][j]
                if not value:
                    continue
                for di, dj in SQUARE_STEPS:
                    ni, nj = i + di, j + dj
                    if ni >= 0 and nj >= 0:
                        grid[ni][nj] += value
        grids.append(grid)
    return WalkTable(n_max, grids)


def walk_table_to_bseries(table: WalkTable) -> BSeries:
    return BSeries([table.slice(n) for n in range(table.n_max + 1)])


# ============================================================================
# Closed Forms
# ============================================================================
def _exact_quotient(numerator: int, denominator: int, what: str) -> int:
    quotient, remainder = divmod(numerator, denominator)
    if remainder:
        raise ArithmeticError(f"{what} is not an integer: {numerator}/{denominator}")
    return quotient


def kreweras_count(n: int) -> int:
    """Walks of length 3n returning to the origin: 4^n C(3n, n) / ((n+1)(2n+1))."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return _exact_quotient(4**n * comb(3 * n, n), (n + 1) * (2 * n + 1), f"a(3*{n})")


def axis_count(i: int, n: int) -> int:
    """Walks of length 3n + 2i ending at (i, 0)."""
    if i < 0 or n < 0:
        raise ValueError(f"i and n must be non-negative, got i={i}, n={n}")
    numerator = 4**n * (2 * i + 1) * comb(2 * i, i) * comb(3 * n + 2 * i, n)
    denominator = (n + i + 1) * (2 * n + 2 * i + 1)
    return _exact_quotient(numerator, denominator, f"a_{{{i},0}}({3 * n + 2 * i})")


def catalan(i: int) -> int:
    if i < 0:
        raise ValueError(f"i must be non-negative, got {i}")
    return comb(2 * i, i) // (i + 1)


def square_lattice_count(n: int) -> int:
    """Closed square-lattice quadrant walks of length 2n: C(2n+2, n+1)^2 / ((2n+1)(2n+4))."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return _exact_quotient(
        comb(2 * n + 2, n + 1) ** 2, (2 * n + 1) * (2 * n + 4), f"b({2 * n})"
    )


def square_lattice_oracle(n: int) -> int:
    """Brute-force count of square-lattice quadrant walks of length 2n back to the origin."""
    return square_lattice_table(2 * n).count(0, 0, 2 * n)
