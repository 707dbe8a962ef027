"""Reading, cleaning and bookkeeping of hourly meter data.

Readings arrive as ``meter_id,hour,kwh`` rows in any order. Each meter is
assembled into a fixed-length hourly profile; faulty values (above the
29 kWh connection cap, non-positive, unparseable, or repeated hours) are
treated as gaps, and meters with more than 1000 gap hours are rejected.

Profiles are stored as integer thousandths of a kWh with ``0`` marking an
absent hour. Zero can never be a valid reading, so no separate mask is
needed and all sums are exact.
"""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from peakprofile.errors import DomainError, FormatError
from peakprofile.units import CAP_MILLI, MILLI, format_milli, parse_milli

logger = logging.getLogger(__name__)

HOURS_PER_YEAR = 8760
MAX_GAPS = 1000
READINGS_HEADER = ("meter_id", "hour", "kwh")


@dataclass(frozen=True, slots=True)
class RawReading:
    meter_id: str
    hour: int
    milli: int | None  # None marks an unparseable value
    line: int = 0

    @property
    def kwh(self) -> float | None:
        return None if self.milli is None else self.milli / MILLI


@dataclass(frozen=True, slots=True)
class Diagnostic:
    line: int
    message: str
    source: str | None = None

    def __str__(self) -> str:
        prefix = f"{self.source}:" if self.source else "line "
        return f"{prefix}{self.line}: {self.message}"


@dataclass
class FaultTally:
    over_cap: int = 0
    non_positive: int = 0
    unparseable: int = 0
    duplicate: int = 0

    def __add__(self, other: FaultTally) -> FaultTally:
        return FaultTally(
            self.over_cap + other.over_cap,
            self.non_positive + other.non_positive,
            self.unparseable + other.unparseable,
            self.duplicate + other.duplicate,
        )


@dataclass
class CleanProfile:
    """One accepted household year. ``values`` holds thousandths of a kWh, 0 = gap."""

    meter_id: str
    values: np.ndarray
    faults: FaultTally = field(default_factory=FaultTally)

    @property
    def hours(self) -> int:
        return len(self.values)

    @property
    def valid_count(self) -> int:
        return int(np.count_nonzero(self.values))

    @property
    def gap_count(self) -> int:
        return self.hours - self.valid_count

    @property
    def raw_sum_milli(self) -> int:
        return int(self.values.sum(dtype=np.int64))

    @property
    def annual_raw_sum(self) -> float:
        return self.raw_sum_milli / MILLI

    @property
    def annual_corrected(self) -> float:
        return correct_annual_total(self)

    def kwh(self) -> np.ndarray:
        """Hourly kWh with NaN for gaps."""
        out = self.values.astype(np.float64) / MILLI
        out[self.values == 0] = np.nan
        return out


@dataclass(frozen=True)
class Rejection:
    meter_id: str
    gap_count: int
    faults: FaultTally
    reason: str = "excess-gaps"


@dataclass
class CleaningReport:
    accepted: int = 0
    rejected: int = 0
    rejected_excess_gaps: int = 0
    faults: FaultTally = field(default_factory=FaultTally)

    def record(self, outcome: CleanProfile | Rejection) -> None:
        self.faults = self.faults + outcome.faults
        if isinstance(outcome, Rejection):
            self.rejected += 1
            self.rejected_excess_gaps += outcome.reason == "excess-gaps"
        else:
            self.accepted += 1

    def merge(self, other: CleaningReport) -> CleaningReport:
        return CleaningReport(
            self.accepted + other.accepted,
            self.rejected + other.rejected,
            self.rejected_excess_gaps + other.rejected_excess_gaps,
            self.faults + other.faults,
        )

    def to_dict(self) -> dict[str, int]:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "faulty_over_cap": self.faults.over_cap,
            "faulty_non_positive": self.faults.non_positive,
            "faulty_unparseable": self.faults.unparseable,
            "faulty_duplicate": self.faults.duplicate,
            "rejected_excess_gaps": self.rejected_excess_gaps,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


@dataclass
class Fleet:
    """Accepted profiles stacked row-wise: ``values[i]`` belongs to ``meter_ids[i]``."""

    meter_ids: list[str]
    values: np.ndarray  # (n, H) int32 thousandths, 0 = gap

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[0] != len(self.meter_ids):
            raise ValueError("values must be (len(meter_ids), H)")
        self._index = {m: i for i, m in enumerate(self.meter_ids)}
        if len(self._index) != len(self.meter_ids):
            raise ValueError("duplicate meter_id in fleet")

    @property
    def hours(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return len(self.meter_ids)

    def rows(self, meter_ids: Iterable[str]) -> np.ndarray:
        idx = np.asarray([self._index[m] for m in meter_ids if m in self._index], dtype=np.intp)
        if idx.size and idx[-1] - idx[0] == idx.size - 1 and np.all(np.diff(idx) == 1):
            return self.values[idx[0] : idx[-1] + 1]  # contiguous members: a view, no copy
        return self.values[idx]

    def profile(self, meter_id: str) -> CleanProfile:
        return CleanProfile(meter_id, self.values[self._index[meter_id]])

    def profiles(self) -> Iterator[CleanProfile]:
        for m, row in zip(self.meter_ids, self.values):
            yield CleanProfile(m, row)

    @classmethod
    def from_profiles(cls, profiles: Sequence[CleanProfile], hours: int | None = None) -> Fleet:
        if not profiles:
            return cls([], np.zeros((0, hours or HOURS_PER_YEAR), dtype=np.int32))
        return cls([p.meter_id for p in profiles], np.stack([p.values for p in profiles]).astype(np.int32))


def parse_readings(
    lines: Iterable[str], hours: int = HOURS_PER_YEAR, source: str | None = None
) -> tuple[list[RawReading], list[Diagnostic]]:
    """Parse readings CSV lines.

    Every data line yields either a reading or a diagnostic. An unparseable
    kWh field still yields a reading (with ``milli=None``) so the hour is
    counted as faulty downstream.
    """
    it = iter(lines)
    header = next(it, None)
    if header is None or tuple(f.strip() for f in header.strip().split(",")) != READINGS_HEADER:
        raise FormatError("missing or invalid header, expected 'meter_id,hour,kwh'", source, 1)

    readings: list[RawReading] = []
    diags: list[Diagnostic] = []
    for lineno, line in enumerate(it, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 3:
            diags.append(Diagnostic(lineno, f"expected 3 fields, got {len(parts)}", source))
            continue
        meter_id, hour_s, kwh_s = (p.strip() for p in parts)
        if not meter_id:
            diags.append(Diagnostic(lineno, "empty meter_id", source))
            continue
        try:
            hour = int(hour_s)
        except ValueError:
            diags.append(Diagnostic(lineno, f"hour {hour_s!r} is not an integer", source))
            continue
        if not 0 <= hour < hours:
            diags.append(Diagnostic(lineno, f"hour {hour} outside [0, {hours - 1}]", source))
            continue
        milli = parse_milli(kwh_s)
        if milli is None:
            diags.append(Diagnostic(lineno, f"unparseable kwh {kwh_s!r}", source))
        readings.append(RawReading(meter_id, hour, milli, lineno))
    return readings, diags


def assemble_profile(
    meter_id: str,
    readings: Iterable[RawReading],
    hours: int = HOURS_PER_YEAR,
    max_gaps: int = MAX_GAPS,
) -> CleanProfile | Rejection:
    """Build one household's hourly profile; reject it when gaps exceed ``max_gaps``."""
    values = np.zeros(hours, dtype=np.int32)
    seen = np.zeros(hours, dtype=bool)
    faults = FaultTally()
    for r in readings:
        if r.meter_id != meter_id:
            raise ValueError(f"reading for {r.meter_id!r} passed to profile {meter_id!r}")
        if seen[r.hour]:
            faults.duplicate += 1
            continue
        seen[r.hour] = True
        if r.milli is None:
            faults.unparseable += 1
        elif r.milli <= 0:
            faults.non_positive += 1
        elif r.milli > CAP_MILLI:
            faults.over_cap += 1
        else:
            values[r.hour] = r.milli
    gaps = hours - int(np.count_nonzero(values))
    if gaps > max_gaps:
        return Rejection(meter_id, gaps, faults)
    return CleanProfile(meter_id, values, faults)


def correct_annual_total(profile: CleanProfile) -> float:
    """Scale the annual sum up to cover gap hours at the profile's own mean.

    Gap hours are filled with the average of the valid hours, deliberately
    without any seasonal weighting, so the result is never below the raw sum.
    """
    valid = profile.valid_count
    if valid == 0:
        raise DomainError(f"profile {profile.meter_id!r} has no valid hours to extrapolate from")
    raw = profile.raw_sum_milli
    return (raw + profile.gap_count * raw / valid) / MILLI


def clean_readings(
    readings: Iterable[RawReading], hours: int = HOURS_PER_YEAR, max_gaps: int = MAX_GAPS
) -> tuple[Fleet, CleaningReport, list[Rejection]]:
    by_meter: dict[str, list[RawReading]] = defaultdict(list)
    for r in readings:
        by_meter[r.meter_id].append(r)
    report = CleaningReport()
    accepted: list[CleanProfile] = []
    rejections: list[Rejection] = []
    for meter_id in sorted(by_meter):
        outcome = assemble_profile(meter_id, by_meter[meter_id], hours, max_gaps)
        report.record(outcome)
        if isinstance(outcome, Rejection):
            rejections.append(outcome)
        else:
            accepted.append(outcome)
    return Fleet.from_profiles(accepted, hours), report, rejections


def read_readings(
    path: str | Path, hours: int = HOURS_PER_YEAR, max_gaps: int = MAX_GAPS
) -> tuple[Fleet, CleaningReport, list[Diagnostic]]:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        readings, diags = parse_readings(fh, hours, source=path.name)
    fleet, report, rejections = clean_readings(readings, hours, max_gaps)
    for d in diags:
        logger.warning("%s", d)
    for rej in rejections:
        logger.info("rejected %s: %d gap hours", rej.meter_id, rej.gap_count)
    return fleet, report, diags


def iter_reading_lines(meter_ids: Sequence[str], values: np.ndarray) -> Iterator[str]:
    """Serialize profiles back to the readings format; gaps are omitted rows."""
    yield ",".join(READINGS_HEADER) + "\n"
    for meter_id, row in zip(meter_ids, values):
        (present,) = np.nonzero(row)
        for h, v in zip(present.tolist(), row[present].tolist()):
            yield f"{meter_id},{h},{format_milli(v)}\n"


def write_readings(path: str | Path, meter_ids: Sequence[str], values: np.ndarray) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.writelines(iter_reading_lines(meter_ids, values))


def clean_matrix(
    meter_ids: Sequence[str], values: np.ndarray, max_gaps: int = MAX_GAPS
) -> tuple[Fleet, CleaningReport]:
    """Apply the cleaning rules to an already assembled (n, H) thousandths matrix."""
    values = np.asarray(values)
    report = CleaningReport()
    over = values > CAP_MILLI
    neg = values < 0
    report.faults = FaultTally(over_cap=int(over.sum()), non_positive=int(neg.sum()))
    if report.faults.over_cap or report.faults.non_positive or values.dtype != np.int32:
        cleaned = values.astype(np.int32)
        cleaned[over | neg] = 0
    else:
        cleaned = values
    del over, neg
    gaps = values.shape[1] - np.count_nonzero(cleaned, axis=1)
    keep = gaps <= max_gaps
    report.accepted = int(keep.sum())
    report.rejected = report.rejected_excess_gaps = int((~keep).sum())
    ids = [m for m, k in zip(meter_ids, keep) if k]
    kept = cleaned if keep.all() else cleaned[keep]
    return Fleet(ids, kept), report
