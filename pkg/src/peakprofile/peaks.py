"""Gross load series and top-fraction peak-hour calendars."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from peakprofile.errors import DomainError, FormatError
from peakprofile.units import MILLI

logger = logging.getLogger(__name__)

DAYS_IN_MONTH = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)
LEVELS = (0.20, 0.05, 0.01)


def month_starts(hours: int) -> np.ndarray:
    """First hour index of each civil month, starting 1 January hour 0.

    ``hours == 8784`` selects a leap year.
    """
    days = list(DAYS_IN_MONTH)
    if hours == 8784:
        days[1] = 29
    return np.concatenate([[0], np.cumsum(days[:-1])]) * 24


def month_of_hour(hours: int) -> np.ndarray:
    """0-based month for every hour of the year."""
    return np.searchsorted(month_starts(hours), np.arange(hours), side="right") - 1


@dataclass(frozen=True)
class GrossSeries:
    values: np.ndarray  # kWh per hour
    source: str = "fleet-aggregate"

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError("gross series must be one-dimensional")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise DomainError("gross series must be finite and non-negative")
        object.__setattr__(self, "values", v)

    @property
    def hours(self) -> int:
        return len(self.values)


def aggregate_gross(values: np.ndarray) -> GrossSeries:
    """Hourly sum over households of an (n, H) thousandths matrix; gaps add nothing."""
    values = np.asarray(values)
    if values.shape[0] == 0:
        logger.warning("empty fleet: gross series is all zeros")
    total = values.sum(axis=0, dtype=np.int64)
    return GrossSeries(total / MILLI, "fleet-aggregate")


@dataclass(frozen=True)
class PeakCalendar:
    fraction: float
    hours: np.ndarray  # ascending hour indices
    monthly_counts: tuple[int, ...]
    n_hours: int  # length of the underlying year

    @property
    def size(self) -> int:
        return len(self.hours)

    def to_dict(self) -> dict:
        return {
            "fraction": self.fraction,
            "hours": self.hours.tolist(),
            "monthly_counts": list(self.monthly_counts),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict()) + "\n"


def peak_count(fraction: float, hours: int) -> int:
    # guard against 0.2 * 8760 = 1751.9999... style rounding
    return math.floor(fraction * hours + 1e-9)


def select_peak_hours(gross: GrossSeries, fraction: float) -> PeakCalendar:
    """Top ``floor(fraction*H)`` hours by load; ties go to the earlier hour."""
    if not 0 < fraction < 1:
        raise DomainError(f"fraction must lie in (0, 1), got {fraction}")
    n = gross.hours
    k = peak_count(fraction, n)
    order = np.argsort(-gross.values, kind="stable")
    hours = np.sort(order[:k])
    months = month_of_hour(n)[hours]
    counts = np.bincount(months, minlength=12)
    return PeakCalendar(fraction, hours, tuple(int(c) for c in counts), n)


def monthly_partition(calendar: PeakCalendar) -> list[np.ndarray]:
    months = month_of_hour(calendar.n_hours)[calendar.hours]
    return [calendar.hours[months == m] for m in range(12)]


def read_gross(path: str | Path) -> GrossSeries:
    """External gross series CSV with header ``hour,kwh`` and every hour present."""
    path = Path(path)
    rows: dict[int, float] = {}
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header.replace(" ", "") != "hour,kwh":
            raise FormatError("expected header 'hour,kwh'", path.name, 1)
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                h_s, v_s = line.split(",")
                h, v = int(h_s), float(v_s)
            except ValueError:
                raise FormatError(f"bad row {line.strip()!r}", path.name, lineno) from None
            if h in rows:
                raise FormatError(f"duplicate hour {h}", path.name, lineno)
            rows[h] = v
    n = len(rows)
    if sorted(rows) != list(range(n)):
        raise FormatError("hours must cover 0..H-1 without gaps", path.name)
    return GrossSeries(np.array([rows[h] for h in range(n)]), "external")


def write_gross(path: str | Path, values: Iterable[float]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("hour,kwh\n")
        for h, v in enumerate(values):
            fh.write(f"{h},{v:.3f}\n")
