"""Signature checks of a fleet against the qualitative targets of the calibration."""

from __future__ import annotations

from typing import TYPE_CHECKING, Mapping

import numpy as np

from peakprofile import bands, coincidence, peaks, stats
from peakprofile.units import MILLI

if TYPE_CHECKING:
    from peakprofile.pipeline import Dataset, RunConfig

EVENING = range(17, 21)
WINTER_MONTHS = (0, 1, 11)
SUMMER_MONTHS = (5, 6, 7)


def _round(x: float | None) -> float | None:
    return None if x is None else round(float(x), 6)


def ev_evening_skew(ev: np.ndarray, day: int) -> list[dict]:
    rows = []
    for h in EVENING:
        col = ev[:, day * 24 + h]
        d = bands.skewness_diagnostic(col[col > 0] / MILLI)
        rows.append(
            {
                "hour": h,
                "mean": _round(d.mean),
                "median": _round(d.median),
                "third_moment": _round(d.third_moment),
                "positively_skewed": bool(d.mean > d.median and (d.third_moment or 0) > 0),
            }
        )
    return rows


def hp_symmetry(hp: np.ndarray, day: int) -> dict:
    """Largest |mean - median| / std over the 24 hours of ``day``."""
    prof = bands.day_bands(hp, day)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.abs(prof.mean - prof.median) / prof.std
    worst = int(np.nanargmax(ratio))
    return {"max_gap_over_std": _round(ratio[worst]), "worst_hour": worst, "symmetric": bool(ratio[worst] <= 0.1)}


def seasonal_ratio(values: np.ndarray) -> float:
    months = peaks.month_of_hour(values.shape[1])
    acc = stats.HourlyAccumulator.from_matrix(values)
    winter = acc.over(np.nonzero(np.isin(months, WINTER_MONTHS))[0]).mean
    summer = acc.over(np.nonzero(np.isin(months, SUMMER_MONTHS))[0]).mean
    return winter / summer


def calibration_report(
    ds: Dataset,
    cfg: RunConfig,
    cals: Mapping[float, peaks.PeakCalendar] | None = None,
    hourly: Mapping | None = None,
) -> dict:
    from peakprofile.pipeline import calendars

    cals = cals if cals is not None else calendars(ds, cfg)
    top = cals[cfg.top_fraction]
    base_code, ev_code, hp_code = cfg.code("base"), cfg.code("ev"), cfg.code("hp")
    doc: dict = {"day": cfg.day, "top_fraction": cfg.top_fraction}

    def top_mean(code):
        acc = hourly[code] if hourly is not None else stats.HourlyAccumulator.from_matrix(ds.group(code))
        return acc.over(top.hours).mean

    if ev_code in ds.table:
        ev = ds.group(ev_code)
        doc["ev_evening_skew"] = ev_evening_skew(ev, cfg.day)
        m = stats.household_maxima(ev)
        doc["ev_maxima"] = {"median": m.median, "p98": m.p98, "p99": m.p99}
        doc["ev_top_mean"] = _round(top_mean(ev_code))
    if hp_code in ds.table:
        hp = ds.group(hp_code)
        doc["hp_symmetry"] = hp_symmetry(hp, cfg.day)
        doc["hp_winter_summer_ratio"] = _round(seasonal_ratio(hp))
        doc["hp_top_mean"] = _round(top_mean(hp_code))
    if base_code in ds.table:
        rates = coincidence.baseline_rates(ds.group(base_code), (3.0,))
        doc["baseline_exceed_3kwh"] = _round(rates[3.0])
        doc["base_top_mean"] = _round(top_mean(base_code))
    if "ev_top_mean" in doc and "hp_top_mean" in doc:
        doc["hp_above_ev"] = bool(doc["hp_top_mean"] > doc["ev_top_mean"])
    return doc
