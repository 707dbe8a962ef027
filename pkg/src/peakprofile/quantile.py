"""Nearest-rank quantiles: the ceil(p*n)-th order statistic, computed in integers."""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def rank(n: int, percent: int | Fraction) -> int:
    """1-based rank of the ``percent`` quantile in a sample of size ``n``."""
    if n < 1:
        raise ValueError("empty sample")
    p = Fraction(percent) / 100
    if not 0 < p <= 1:
        raise ValueError(f"percent must be in (0, 100], got {percent}")
    num = p.numerator * n
    return max(1, -(-num // p.denominator))


def nearest_rank(sorted_values: np.ndarray, percent: int | Fraction) -> float:
    return sorted_values[rank(len(sorted_values), percent) - 1]


def nearest_rank_columns(sorted_cols: np.ndarray, counts: np.ndarray, percent: int) -> np.ndarray:
    """Per-column quantile of column-wise sorted data.

    Column ``j`` holds ``counts[j]`` valid values in its first rows; columns
    with no values give NaN.
    """
    counts = np.asarray(counts, dtype=np.int64)
    idx = np.maximum((percent * counts + 99) // 100, 1) - 1
    out = np.full(len(counts), np.nan)
    ok = counts > 0
    cols = np.nonzero(ok)[0]
    out[ok] = sorted_cols[idx[ok], cols]
    return out
