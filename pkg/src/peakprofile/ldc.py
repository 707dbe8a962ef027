"""Load duration curves and whole-category technology adoption scenarios.

An adoption scenario swaps a base category's hourly aggregate out of the
gross series and puts in the aggregate of an adopter category, scaled by
the household-count ratio ``n_base / n_adopter``.
"""

from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from peakprofile.errors import DomainError
from peakprofile.peaks import peak_count
from peakprofile.quantile import nearest_rank
from peakprofile.taxonomy import CategoryCode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LoadDurationCurve:
    values: np.ndarray  # non-increasing
    order: np.ndarray  # hour index of each rank
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.values)


def build_ldc(series: np.ndarray, provenance: str = "") -> LoadDurationCurve:
    x = np.asarray(series, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DomainError("series must be finite")
    order = np.argsort(-x, kind="stable")
    return LoadDurationCurve(x[order], order, provenance)


@dataclass(frozen=True)
class AdoptionScenario:
    base_code: CategoryCode
    adopter_code: CategoryCode
    n_base: int
    n_adopter: int

    def __post_init__(self) -> None:
        if self.n_base < 1 or self.n_adopter < 1:
            raise DomainError("scenario household counts must be >= 1")

    @property
    def ratio(self) -> float:
        return self.n_base / self.n_adopter

    @property
    def label(self) -> str:
        return f"Up_{self.adopter_code}"


@dataclass(frozen=True)
class WindowStats:
    window_fraction: float
    size: int
    max: float
    mean: float
    median: float

    def to_dict(self) -> dict:
        return {
            "window_fraction": self.window_fraction,
            "window_hours": self.size,
            "max": self.max,
            "mean": self.mean,
            "median": self.median,
        }


def peak_window_stats(ldc: LoadDurationCurve, fraction: float) -> WindowStats:
    """Max, mean and nearest-rank median over the top ``floor(fraction*H)`` ranks."""
    if not 0 < fraction < 1:
        raise DomainError(f"fraction must lie in (0, 1), got {fraction}")
    k = peak_count(fraction, len(ldc))
    if k < 1:
        raise DomainError("window is empty")
    window = ldc.values[:k]
    return WindowStats(fraction, k, float(window[0]), float(window.mean()), float(nearest_rank(window[::-1], 50)))


def compare_windows(this: WindowStats, other: WindowStats) -> dict[str, float]:
    """Percentage by which ``other`` exceeds ``this`` for each statistic."""
    return {key: (getattr(other, key) / getattr(this, key) - 1.0) * 100.0 for key in ("max", "mean", "median")}


@dataclass
class ExtrapolationResult:
    scenario: AdoptionScenario
    gross: np.ndarray
    up_series: np.ndarray
    up_ldc: LoadDurationCurve
    window: WindowStats
    warnings: list[str] = field(default_factory=list)

    def series_csv(self, unit: str = "kWh") -> str:
        scale, name = _unit(unit)
        buf = io.StringIO()
        buf.write(f"hour,gross_{name},up_{name}\n")
        for h, (g, u) in enumerate(zip(self.gross, self.up_series)):
            buf.write(f"{h},{g / scale:.6f},{u / scale:.6f}\n")
        return buf.getvalue()

    def ldc_csv(self, unit: str = "kWh") -> str:
        scale, name = _unit(unit)
        buf = io.StringIO()
        buf.write(f"rank,ldc_{name}\n")
        for r, v in enumerate(self.up_ldc.values):
            buf.write(f"{r},{v / scale:.6f}\n")
        return buf.getvalue()

    def stats_json(self, unit: str = "kWh", comparison: dict | None = None) -> str:
        scale, name = _unit(unit)
        w = self.window
        doc = {
            "scenario": self.scenario.label,
            "base": str(self.scenario.base_code),
            "adopter": str(self.scenario.adopter_code),
            "n_base": self.scenario.n_base,
            "n_adopter": self.scenario.n_adopter,
            "ratio": self.scenario.ratio,
            "unit": name,
            "max": w.max / scale,
            "mean": w.mean / scale,
            "median": w.median / scale,
            "window_fraction": w.window_fraction,
            "warnings": self.warnings,
        }
        if comparison is not None:
            doc["comparison"] = comparison
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _unit(unit: str) -> tuple[float, str]:
    if unit == "kWh":
        return 1.0, "kwh"
    if unit == "MWh":
        return 1000.0, "mwh"
    raise ValueError(f"unknown unit {unit!r}")


def pick_unit(series: np.ndarray) -> str:
    """MWh once hourly aggregates exceed 1000 kWh."""
    return "MWh" if np.max(series, initial=0.0) > 1000.0 else "kWh"


def extrapolate_adoption(
    gross: np.ndarray,
    base_agg: np.ndarray,
    adopter_agg: np.ndarray,
    scenario: AdoptionScenario,
    fraction: float = 0.20,
) -> ExtrapolationResult:
    """Replace the base category's load by the scaled adopter load, hour by hour."""
    gross = np.asarray(gross, dtype=np.float64)
    base_agg = np.asarray(base_agg, dtype=np.float64)
    adopter_agg = np.asarray(adopter_agg, dtype=np.float64)
    if not (gross.shape == base_agg.shape == adopter_agg.shape) or gross.ndim != 1:
        raise DomainError("gross, base and adopter series must share one length")
    # the swap is formed first so an identity scenario adds an exact zero
    delta = scenario.ratio * adopter_agg - base_agg
    up = gross + delta
    warnings = []
    negative = np.nonzero(up < 0)[0]
    if negative.size:
        shown = ", ".join(str(h) for h in negative[:20])
        more = f" (+{negative.size - 20} more)" if negative.size > 20 else ""
        warnings.append(f"negative load after substitution at hours {shown}{more}")
        logger.warning(warnings[-1])
    ldc = build_ldc(up, scenario.label)
    return ExtrapolationResult(scenario, gross, up, ldc, peak_window_stats(ldc, fraction), warnings)
