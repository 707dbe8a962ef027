"""EV coincidence approximated as the share of households above a load threshold.

A household counts as charging in an hour when its metered load strictly
exceeds the threshold. Households with a gap in that hour leave the
denominator. The same measure on a matched category without EVs gives the
false-positive floor of the proxy.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from peakprofile.errors import DomainError
from peakprofile.peaks import month_of_hour
from peakprofile.taxonomy import CategoryCode
from peakprofile.units import kwh_to_milli

DEFAULT_THRESHOLDS = (3.0, 4.0)
AFTERNOON = range(15, 20)  # clock hours 15:00-20:00
HOLIDAY_DAYS = (181, 212)  # 1 July - 31 July, end exclusive


@dataclass(frozen=True)
class CoincidenceSeries:
    category: CategoryCode | None
    threshold: float
    exceed: np.ndarray  # int64 per hour
    denominator: np.ndarray  # int64 per hour

    @property
    def probability(self) -> np.ndarray:
        """Exceedance share per hour; NaN where no household reported."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.denominator > 0, self.exceed / np.maximum(self.denominator, 1), np.nan)

    @property
    def year_average(self) -> float:
        """Pooled share over all reported household-hours."""
        total = int(self.denominator.sum())
        return int(self.exceed.sum()) / total if total else math.nan

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        if header:
            buf.write("hour,threshold_kwh,p_exceed,n_denominator\n")
        p = self.probability
        for h in range(len(p)):
            ps = "" if math.isnan(p[h]) else f"{p[h]:.6f}"
            buf.write(f"{h},{self.threshold:g},{ps},{int(self.denominator[h])}\n")
        return buf.getvalue()


def exceedance_series(values: np.ndarray, threshold: float, category: CategoryCode | None = None) -> CoincidenceSeries:
    if not threshold > 0:
        raise DomainError("threshold must be positive")
    values = np.asarray(values)
    limit = kwh_to_milli(threshold)
    exceed = np.zeros(values.shape[1], dtype=np.int64)
    denom = np.zeros(values.shape[1], dtype=np.int64)
    for start in range(0, values.shape[0], 1024):
        block = values[start : start + 1024]
        exceed += np.count_nonzero(block > limit, axis=0)
        denom += np.count_nonzero(block, axis=0)
    return CoincidenceSeries(category, threshold, exceed, denom)


def baseline_rates(values: np.ndarray, thresholds=DEFAULT_THRESHOLDS) -> dict[float, float]:
    """Year-average exceedance per threshold for a category without EVs."""
    values = np.asarray(values)
    out = {}
    for thr in thresholds:
        s = exceedance_series(values, thr)
        avg = s.year_average
        out[thr] = 0.0 if math.isnan(avg) else avg
    return out


def net_series(series: CoincidenceSeries, baseline_rate: float) -> np.ndarray:
    """EV exceedance minus the baseline floor, clipped at 0 (an approximation only)."""
    return np.clip(series.probability - baseline_rate, 0.0, None)


@dataclass(frozen=True)
class CoincidenceSummary:
    threshold: float
    year_max: float
    year_max_hour: int
    year_mean: float
    afternoon_range: tuple[float, float]
    monthly_means: tuple[float, ...]
    holiday_mean: float
    outside_holiday_mean: float

    def to_dict(self) -> dict:
        return {
            "threshold_kwh": self.threshold,
            "year_max": _num(self.year_max),
            "year_max_hour": self.year_max_hour,
            "year_mean": _num(self.year_mean),
            "afternoon_range": [_num(x) for x in self.afternoon_range],
            "monthly_means": [_num(x) for x in self.monthly_means],
            "holiday_mean": _num(self.holiday_mean),
            "outside_holiday_mean": _num(self.outside_holiday_mean),
        }


def _num(x: float) -> float | None:
    return None if math.isnan(x) else round(x, 6)


def _nanmean(x: np.ndarray) -> float:
    x = x[~np.isnan(x)]
    return float(x.mean()) if x.size else math.nan


def coincidence_summary(series: CoincidenceSeries, holiday_days: tuple[int, int] = HOLIDAY_DAYS) -> CoincidenceSummary:
    """Summary over hourly probabilities (means are unweighted over hours)."""
    p = series.probability
    if np.all(np.isnan(p)):
        raise DomainError("series has no reported hours")
    n = len(p)
    hour_of_day = np.arange(n) % 24
    day = np.arange(n) // 24
    afternoon = p[np.isin(hour_of_day, list(AFTERNOON)) & ~np.isnan(p)]
    months = month_of_hour(n)
    holiday = (day >= holiday_days[0]) & (day < holiday_days[1])
    imax = int(np.nanargmax(p))
    return CoincidenceSummary(
        threshold=series.threshold,
        year_max=float(p[imax]),
        year_max_hour=imax,
        year_mean=_nanmean(p),
        afternoon_range=(float(afternoon.min()), float(afternoon.max())) if afternoon.size else (math.nan, math.nan),
        monthly_means=tuple(_nanmean(p[months == m]) for m in range(12)),
        holiday_mean=_nanmean(p[holiday]),
        outside_holiday_mean=_nanmean(p[~holiday]),
    )


def summary_json(summaries: list[CoincidenceSummary], baseline: dict[float, float] | None = None, category: str = "", baseline_category: str = "") -> str:
    doc = {
        "category": category,
        "thresholds": [s.to_dict() for s in summaries],
    }
    if baseline is not None:
        doc["baseline_category"] = baseline_category
        doc["baseline_year_average"] = {f"{k:g}": v for k, v in baseline.items()}
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"
