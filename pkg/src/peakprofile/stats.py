"""Per-category statistics over peak hours, annual means and household maxima.

Means and standard deviations pool every (household, hour) observation of
a subset and use the population convention (divide by N). All sums are
carried as exact integers in thousandths of a kWh, so any sharding or merge
order gives identical state.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from peakprofile.errors import DomainError
from peakprofile.peaks import PeakCalendar, month_of_hour
from peakprofile.quantile import nearest_rank
from peakprofile.taxonomy import CategoryCode
from peakprofile.units import CAP_KWH, MILLI, kwh_to_milli

ROW_CHUNK = 512


@dataclass
class StreamAccumulator:
    count: int = 0
    sum: int = 0  # thousandths of a kWh
    sum_sq: int = 0  # squared thousandths

    def add(self, kwh: float) -> StreamAccumulator:
        if not math.isfinite(kwh) or kwh < 0:
            raise ValueError(f"observation must be finite and non-negative, got {kwh}")
        m = kwh_to_milli(kwh)
        self.count += 1
        self.sum += m
        self.sum_sq += m * m
        return self

    def add_milli(self, values: np.ndarray) -> StreamAccumulator:
        """Add positive thousandths from an array; zeros (gaps) are skipped."""
        v = np.asarray(values)
        v = v[v > 0].astype(np.int64)
        self.count += int(v.size)
        self.sum += int(v.sum())
        self.sum_sq += int(np.dot(v, v))
        return self

    def merge(self, other: StreamAccumulator) -> StreamAccumulator:
        return StreamAccumulator(self.count + other.count, self.sum + other.sum, self.sum_sq + other.sum_sq)

    __add__ = merge

    @property
    def mean(self) -> float | None:
        if self.count == 0:
            return None
        return self.sum / self.count / MILLI

    @property
    def variance(self) -> float | None:
        """Population variance in kWh^2 (exact integer numerator)."""
        if self.count == 0:
            return None
        num = self.count * self.sum_sq - self.sum * self.sum
        return num / (self.count * self.count) / (MILLI * MILLI)

    @property
    def sample_variance(self) -> float | None:
        if self.count < 2:
            return None
        num = self.count * self.sum_sq - self.sum * self.sum
        return num / (self.count * (self.count - 1)) / (MILLI * MILLI)

    @property
    def std(self) -> float | None:
        var = self.variance
        return None if var is None else math.sqrt(var)


def accumulate(acc: StreamAccumulator, observation: float) -> StreamAccumulator:
    return StreamAccumulator(acc.count, acc.sum, acc.sum_sq).add(observation)


def merge(a: StreamAccumulator, b: StreamAccumulator) -> StreamAccumulator:
    return a.merge(b)


@dataclass
class HourlyAccumulator:
    """Column-wise accumulators: one StreamAccumulator per hour of the year."""

    count: np.ndarray
    sum: np.ndarray
    sum_sq: np.ndarray

    @classmethod
    def empty(cls, hours: int) -> HourlyAccumulator:
        z = lambda: np.zeros(hours, dtype=np.int64)  # noqa: E731
        return cls(z(), z(), z())

    @classmethod
    def from_matrix(cls, values: np.ndarray) -> HourlyAccumulator:
        acc = cls.empty(values.shape[1])
        for start in range(0, values.shape[0], ROW_CHUNK):
            block = values[start : start + ROW_CHUNK].astype(np.int64)
            acc.count += np.count_nonzero(block, axis=0)
            acc.sum += block.sum(axis=0)
            acc.sum_sq += (block * block).sum(axis=0)
        return acc

    def merge(self, other: HourlyAccumulator) -> HourlyAccumulator:
        return HourlyAccumulator(self.count + other.count, self.sum + other.sum, self.sum_sq + other.sum_sq)

    def over(self, hours: np.ndarray) -> StreamAccumulator:
        return StreamAccumulator(
            # per-hour totals fit int64; their sum over a year may not at national scale
            int(self.count[hours].sum()),
            sum(self.sum[hours].tolist()),
            sum(self.sum_sq[hours].tolist()),
        )


@dataclass(frozen=True)
class PeakStat:
    category: CategoryCode
    subset: str  # "01".."12" for months, "20%" / "5%" / "1%" for yearly levels
    n_obs: int
    mean: float | None
    std: float | None

    @property
    def absent(self) -> bool:
        return self.n_obs == 0


def level_label(fraction: float) -> str:
    return f"{fraction * 100:g}%"


@dataclass
class PeakStatReport:
    rows: list[PeakStat] = field(default_factory=list)

    def get(self, category: CategoryCode, subset: str) -> PeakStat:
        for r in self.rows:
            if r.category == category and r.subset == subset:
                return r
        raise KeyError((category, subset))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("category,month_or_level,mean_kwh,std_kwh,n_obs\n")
        for r in self.rows:
            mean = "" if r.mean is None else f"{r.mean:.6f}"
            std = "" if r.std is None else f"{r.std:.6f}"
            buf.write(f"{r.category},{r.subset},{mean},{std},{r.n_obs}\n")
        return buf.getvalue()

    def monthly_grid(self, categories: Sequence[CategoryCode]) -> tuple[np.ndarray, np.ndarray]:
        """(means, stds) arrays of shape (len(categories), 12); NaN where absent."""
        means = np.full((len(categories), 12), np.nan)
        stds = np.full((len(categories), 12), np.nan)
        for r in self.rows:
            if r.subset.isdigit() and r.category in categories and not r.absent:
                i, j = categories.index(r.category), int(r.subset) - 1
                means[i, j], stds[i, j] = r.mean, r.std
        return means, stds


def _stat(code: CategoryCode, subset: str, acc: StreamAccumulator) -> PeakStat:
    return PeakStat(code, subset, acc.count, acc.mean, acc.std)


def peak_stats(
    groups: Mapping[CategoryCode, np.ndarray],
    calendar: PeakCalendar,
    hourly: Mapping[CategoryCode, HourlyAccumulator] | None = None,
) -> PeakStatReport:
    """Monthly and whole-year statistics of each category over the calendar's hours."""
    months = month_of_hour(calendar.n_hours)[calendar.hours]
    report = PeakStatReport()
    for code in sorted(groups, key=str):
        acc = hourly[code] if hourly is not None else HourlyAccumulator.from_matrix(groups[code])
        for m in range(12):
            report.rows.append(_stat(code, f"{m + 1:02d}", acc.over(calendar.hours[months == m])))
        report.rows.append(_stat(code, level_label(calendar.fraction), acc.over(calendar.hours)))
    return report


def yearly_level_stats(
    groups: Mapping[CategoryCode, np.ndarray],
    calendars: Sequence[PeakCalendar],
    hourly: Mapping[CategoryCode, HourlyAccumulator] | None = None,
) -> dict[tuple[CategoryCode, str], StreamAccumulator]:
    """Pooled accumulator per (category, level); mean/variance via its properties."""
    out = {}
    for code in sorted(groups, key=str):
        acc = hourly[code] if hourly is not None else HourlyAccumulator.from_matrix(groups[code])
        for cal in calendars:
            out[(code, level_label(cal.fraction))] = acc.over(cal.hours)
    return out


def corrected_totals(values: np.ndarray) -> np.ndarray:
    """Gap-corrected annual kWh per household of an (n, H) thousandths matrix."""
    values = np.asarray(values)
    raw = values.sum(axis=1, dtype=np.int64)
    valid = np.count_nonzero(values, axis=1)
    if np.any(valid == 0):
        raise DomainError("household without valid hours cannot be gap-corrected")
    gaps = values.shape[1] - valid
    return (raw + gaps * raw / valid) / MILLI


@dataclass(frozen=True)
class AnnualStat:
    category: CategoryCode
    households: int
    avg_hourly_kwh: float


def annual_means(groups: Mapping[CategoryCode, np.ndarray]) -> list[AnnualStat]:
    out = []
    for code in sorted(groups, key=str):
        x = groups[code]
        if x.shape[0] == 0:
            continue
        per_hour = corrected_totals(x) / x.shape[1]
        out.append(AnnualStat(code, x.shape[0], float(per_hour.mean())))
    return out


def annual_means_csv(stats: Iterable[AnnualStat]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["occupancy", "dwelling", "area", "income", "ev", "hp", "category", "households", "avg_hourly_kwh"])
    for s in stats:
        c = s.category
        w.writerow([c.occupancy, c.dwelling, f"A{c.area}", f"€{c.income}", c.ev, c.hp, str(c), s.households, f"{s.avg_hourly_kwh:.3f}"])
    return buf.getvalue()


HIST_EDGES = np.arange(0.0, CAP_KWH + 0.5, 0.5)


@dataclass(frozen=True)
class MaxReport:
    households: int
    median: float
    p98: float
    p99: float
    histogram: tuple[int, ...]
    bin_edges: tuple[float, ...] = tuple(HIST_EDGES)

    def to_dict(self) -> dict:
        return {
            "households": self.households,
            "median_kwh": self.median,
            "p98_kwh": self.p98,
            "p99_kwh": self.p99,
            "bin_edges_kwh": list(self.bin_edges),
            "histogram": list(self.histogram),
        }


def household_maxima(values: np.ndarray) -> MaxReport:
    """Distribution of per-household yearly peaks (nearest-rank percentiles)."""
    values = np.asarray(values)
    if values.shape[0] == 0:
        raise DomainError("no households in category")
    peaks = values.max(axis=1)
    if np.any(peaks <= 0):
        raise DomainError("household without valid hours")
    s = np.sort(peaks) / MILLI
    hist, _ = np.histogram(s, bins=HIST_EDGES)
    return MaxReport(
        len(s),
        float(nearest_rank(s, 50)),
        float(nearest_rank(s, 98)),
        float(nearest_rank(s, 99)),
        tuple(int(h) for h in hist),
    )


def maxima_json(reports: Mapping[CategoryCode, MaxReport]) -> str:
    return json.dumps({str(c): reports[c].to_dict() for c in sorted(reports, key=str)}, indent=2, ensure_ascii=False) + "\n"
