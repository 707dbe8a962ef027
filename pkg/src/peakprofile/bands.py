"""Hourly distribution bands for one day of one category.

For each clock hour the households' readings form a sample; the profile
holds its 5%..95% nearest-rank quantiles, median, mean and population std.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from peakprofile.errors import DomainError
from peakprofile.quantile import nearest_rank, nearest_rank_columns
from peakprofile.taxonomy import CategoryCode
from peakprofile.units import CAP_MILLI, MILLI

PERCENTS = tuple(range(5, 100, 5))
REFERENCE_DAY = 4  # 5 January


@dataclass(frozen=True)
class DayBandProfile:
    category: CategoryCode | None
    day: int
    quantiles: np.ndarray  # (len(PERCENTS), 24) kWh, NaN where the hour has no data
    mean: np.ndarray
    median: np.ndarray
    std: np.ndarray
    n: np.ndarray

    def band(self, percent: int) -> np.ndarray:
        return self.quantiles[PERCENTS.index(percent)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["hour"] + [f"q{p:02d}" for p in PERCENTS] + ["mean", "median", "std", "n"]
        buf.write(",".join(cols) + "\n")

        def fmt(x: float) -> str:
            return "" if math.isnan(x) else f"{x:.4f}"

        for h in range(24):
            row = [str(h)] + [fmt(q) for q in self.quantiles[:, h]]
            row += [fmt(self.mean[h]), fmt(self.median[h]), fmt(self.std[h]), str(int(self.n[h]))]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


def _day_columns(values: np.ndarray, day: int) -> np.ndarray:
    hours = values.shape[1]
    if not 0 <= day < hours // 24:
        raise DomainError(f"day {day} outside the year (0..{hours // 24 - 1})")
    if values.shape[0] == 0:
        raise DomainError("category has no households")
    return values[:, day * 24 : day * 24 + 24]


def _moments(sub: np.ndarray, n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = sub.astype(np.int64)
    total = s.sum(axis=0)
    sq = (s * s).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        nn = n.astype(object)
        mean = np.where(n > 0, total / np.maximum(n, 1) / MILLI, np.nan)
        var_num = np.array([int(a) * int(b) - int(c) * int(c) for a, b, c in zip(nn, sq, total)], dtype=np.float64)
        var = np.where(n > 0, var_num / np.maximum(n, 1) ** 2 / MILLI**2, np.nan)
    return mean, np.sqrt(np.maximum(var, 0.0))


def day_bands(values: np.ndarray, day: int, category: CategoryCode | None = None, sketch: bool = False) -> DayBandProfile:
    """Bands over the 24 hours of ``day`` (0-based day of year).

    With ``sketch=True`` each hour is summarized by a count histogram over
    the 0.001 kWh grid instead of the raw sample. Histograms of shards add
    up, and since meter data lives on that grid the quantiles stay exact.
    """
    sub = _day_columns(np.asarray(values), day)
    n = np.count_nonzero(sub, axis=0)
    mean, std = _moments(sub, n)
    if sketch:
        hist = HourHistograms.from_matrix(sub)
        q = np.vstack([hist.quantile(p) for p in PERCENTS])
        med = hist.quantile(50)
    else:
        # gaps sort to the end as +inf, out of reach of every valid rank
        f = np.where(sub > 0, sub.astype(np.float64), np.inf)
        f.sort(axis=0)
        q = np.vstack([nearest_rank_columns(f, n, p) for p in PERCENTS]) / MILLI
        med = nearest_rank_columns(f, n, 50) / MILLI
    return DayBandProfile(category, day, q, mean, med, std, n)


@dataclass
class HourHistograms:
    """Per-hour counts over the 0.001 kWh grid, ``counts[h, v]`` for ``v`` thousandths."""

    counts: np.ndarray

    @classmethod
    def from_matrix(cls, sub: np.ndarray) -> HourHistograms:
        counts = np.zeros((sub.shape[1], CAP_MILLI + 1), dtype=np.int64)
        for h in range(sub.shape[1]):
            col = sub[:, h]
            counts[h] = np.bincount(col[col > 0], minlength=CAP_MILLI + 1)[: CAP_MILLI + 1]
        return cls(counts)

    def merge(self, other: HourHistograms) -> HourHistograms:
        return HourHistograms(self.counts + other.counts)

    def quantile(self, percent: int) -> np.ndarray:
        out = np.full(self.counts.shape[0], np.nan)
        for h, row in enumerate(self.counts):
            n = int(row.sum())
            if n:
                r = max((percent * n + 99) // 100, 1)
                out[h] = int(np.searchsorted(np.cumsum(row), r)) / MILLI
        return out


@dataclass(frozen=True)
class SkewDiagnostic:
    mean: float
    median: float
    std: float
    mean_median_gap: float
    third_moment: float | None  # None when std == 0


def skewness_diagnostic(sample: np.ndarray) -> SkewDiagnostic:
    """Mean-minus-median gap and population third standardized moment."""
    x = np.asarray(sample, dtype=np.float64)
    x = x[~np.isnan(x)]
    if x.size < 3:
        raise DomainError("skewness needs at least 3 observations")
    mean = float(x.mean())
    med = float(nearest_rank(np.sort(x), 50))
    d = x - mean
    m2 = float(np.mean(d * d))
    std = math.sqrt(m2)
    third = float(np.mean(d**3)) / m2**1.5 if m2 > 0 else None
    return SkewDiagnostic(mean, med, std, mean - med, third)
