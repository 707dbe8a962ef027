"""Deterministic synthetic household fleet.

Every household draws from its own generator seeded by ``(seed, index)``,
so a fleet is a pure function of its configuration and can be generated
in any chunking or process layout with identical output.

Load model per household and hour::

    base   = shape(hour) * season(day) * weekday(day, hour) * size * (spread + noise)
    heat   = max(0, heat_baseload + heat_amplitude * cos(season)) * spread_hp + noise   (HP only)
    charge = contiguous blocks at charger power until the drawn energy is delivered (EV only)

The defaults are shaped after qualitative features of Danish residential
data: a small morning and a large 17-18 h peak, winter-peaking heat pump
load with a symmetric spread, and EV charging that shows up as a rare,
afternoon-heavy right tail. They are calibration targets, not a fit.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from peakprofile.errors import FormatError
from peakprofile.taxonomy import CategoryCode, CategoryScheme, HouseholdAttributes
from peakprofile.units import CAP_MILLI, MILLI

logger = logging.getLogger(__name__)

OCCUPANCY_FACTOR = {"P1": 0.55, "P2": 0.8, "P3": 1.0, "P5+": 1.2}
AREA_FACTOR = {1: 0.85, 2: 1.0, 3: 1.15}
INCOME_FACTOR = {1: 0.98, 2: 1.0, 3: 1.02}
DWELLING_FACTOR = {"Ap": 0.7, "H": 1.0}

DEFAULT_COUNTS = {
    "H_P3_A1_€3_EV0_HP0": 600,
    "H_P3_A2_€3_EV0_HP0": 1800,
    "H_P3_A3_€3_EV0_HP0": 2700,
    "H_P3_A3_€3_EV1_HP0": 400,
    "H_P3_A2_€3_EV0_HP1": 200,
    "H_P3_A3_€3_EV0_HP1": 1200,
    "Ap_P1_A1_€1_EV0_HP0": 400,
    "Ap_P2_A2_€2_EV0_HP0": 400,
    "H_P1_A1_€1_EV0_HP0": 200,
    "H_P5+_A3_€3_EV0_HP0": 300,
}


@dataclass(frozen=True)
class ChargerClass:
    power: float  # kW
    battery: float  # typical energy drawn per session, kWh
    share: float  # fraction of EV households with this charger
    plugin_probability: float = 0.25
    start_mean: float = 17.5  # clock hour
    start_sd: float = 1.5
    night_share: float = 0.15  # sessions started around 1 a.m. instead
    holiday_dip: float = 0.5  # plugin probability multiplier inside the holiday window

    def __post_init__(self) -> None:
        if not self.power > 0:
            raise ValueError("charger power must be positive")
        if not 0 <= self.plugin_probability <= 1:
            raise ValueError("plugin probability must lie in [0, 1]")
        if self.battery <= 0 or self.share < 0:
            raise ValueError("battery must be positive and share non-negative")


DEFAULT_CHARGERS = {
    "slow": ChargerClass(power=3.7, battery=10.0, share=0.35),
    "medium": ChargerClass(power=11.0, battery=15.0, share=0.635),
    "fast": ChargerClass(power=22.0, battery=20.0, share=0.015),
}


@dataclass(frozen=True)
class HeatModel:
    amplitude: float = 0.7  # kWh, seasonal swing
    baseload: float = 0.5  # kWh, annual offset
    phase_day: int = 15  # day of the seasonal maximum
    noise: float = 0.4  # kWh, symmetric per-hour noise
    spread: float = 0.3  # relative household-to-household spread


@dataclass(frozen=True)
class SynthConfig:
    hours: int = 8760
    seed: int = 0
    counts: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_COUNTS))
    scale: float = 1.0
    night_kwh: float = 0.22
    day_kwh: float = 0.32
    morning_hour: int = 7
    morning_kwh: float = 0.3
    evening_hour: int = 17
    evening_kwh: float = 0.45
    weekend_factor: float = 1.1
    winter_amplitude: float = 0.3
    lighting_amplitude: float = 0.5  # extra seasonal swing of the evening peak
    noise: float = 0.2
    household_spread: float = 0.15
    spike_probability: float = 0.007  # per hour: kettle, oven, sauna and similar bursts
    spike_kwh: float = 2.5
    first_weekday: int = 6  # 1 January 2017 was a Sunday
    holiday_start: int = 181
    holiday_end: int = 212
    gap_rate: float = 0.0
    heat: HeatModel = HeatModel()
    chargers: Mapping[str, ChargerClass] = field(default_factory=lambda: dict(DEFAULT_CHARGERS))

    def __post_init__(self) -> None:
        if self.hours % 24 or self.hours <= 0:
            raise ValueError("hours must be a positive multiple of 24")
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("household counts must be non-negative")
        for name in ("night_kwh", "day_kwh", "morning_kwh", "evening_kwh", "noise", "household_spread"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 <= self.spike_probability <= 1:
            raise ValueError("spike_probability must lie in [0, 1]")
        if not 0 <= self.gap_rate < 1:
            raise ValueError("gap_rate must lie in [0, 1)")
        for code in self.counts:
            CategoryCode.parse(code)

    def household_plan(self) -> list[CategoryCode]:
        """Category of every household in generation order."""
        plan = []
        for code in sorted(self.counts):
            n = int(round(self.counts[code] * self.scale))
            plan.extend([CategoryCode.parse(code)] * n)
        return plan


# -- configuration file -------------------------------------------------------

_FLOAT_KEYS = {f.name for f in fields(SynthConfig) if f.type in ("float", float)}
_INT_KEYS = {"hours", "seed", "morning_hour", "evening_hour", "first_weekday", "holiday_start", "holiday_end"}


def parse_config_lines(lines) -> dict[str, str]:
    """``key = value`` lines with ``#`` comments; later keys override earlier ones."""
    out = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise FormatError("empty key", line=lineno)
        out[key] = value
    return out


def read_config(path: str | Path) -> dict[str, str]:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        try:
            return parse_config_lines(fh)
        except FormatError as exc:
            raise FormatError(str(exc).split(": ", 1)[-1], path.name, exc.line) from None


def synth_config_from_mapping(values: Mapping[str, str], ignore_unknown: bool = False) -> SynthConfig:
    kw: dict = {}
    counts: dict[str, int] = {}
    heat: dict[str, float] = {}
    chargers = {name: {} for name in DEFAULT_CHARGERS}
    heat_fields = {f.name for f in fields(HeatModel)}
    charger_fields = {f.name for f in fields(ChargerClass)}
    try:
        for key, value in values.items():
            if key.startswith("count."):
                code = key[len("count."):]
                CategoryCode.parse(code)
                counts[code] = int(value)
            elif key.startswith("heat.") and key[5:] in heat_fields:
                heat[key[5:]] = int(value) if key[5:] == "phase_day" else float(value)
            elif key.startswith("charger."):
                parts = key.split(".")
                if len(parts) != 3 or parts[2] not in charger_fields:
                    raise FormatError(f"bad charger key {key!r}")
                chargers.setdefault(parts[1], {})[parts[2]] = float(value)
            elif key in _INT_KEYS:
                kw[key] = int(value)
            elif key in _FLOAT_KEYS:
                kw[key] = float(value)
            elif not ignore_unknown:
                raise FormatError(f"unknown configuration key {key!r}")
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"bad configuration value: {exc}") from None
    if counts:
        kw["counts"] = counts
    if heat:
        kw["heat"] = replace(HeatModel(), **heat)
    merged = {}
    for name, over in chargers.items():
        base = DEFAULT_CHARGERS.get(name)
        if base is None:
            missing = {"power", "battery", "share"} - set(over)
            if missing:
                raise FormatError(f"charger {name!r} needs {sorted(missing)}")
            merged[name] = ChargerClass(**over)
        else:
            merged[name] = replace(base, **over)
    kw["chargers"] = merged
    try:
        return SynthConfig(**kw)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def default_config_path() -> Path:
    return Path(__file__).parent / "data" / "demo.cfg"


# -- generation ----------------------------------------------------------------


def _substream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def _base_shape(cfg: SynthConfig) -> np.ndarray:
    h = np.arange(24)
    bump = lambda centre, width: np.exp(-0.5 * ((h - centre) / width) ** 2)  # noqa: E731
    daytime = 1.0 / (1.0 + np.exp(-(h - 6.5) * 1.5)) * (1.0 / (1.0 + np.exp((h - 22.5) * 1.5)))
    return (
        cfg.night_kwh
        + (cfg.day_kwh - cfg.night_kwh) * daytime
        + cfg.morning_kwh * bump(cfg.morning_hour + 0.5, 1.0)
        + cfg.evening_kwh * bump(cfg.evening_hour + 0.5, 1.5)
    )


def _season(days: np.ndarray, phase_day: int = 15) -> np.ndarray:
    return np.cos(2 * np.pi * (days - phase_day) / 365.0)


def _size_factor(code: CategoryCode) -> float:
    return OCCUPANCY_FACTOR.get(code.occupancy, 1.0) * AREA_FACTOR.get(code.area, 1.0) * INCOME_FACTOR.get(code.income, 1.0) * DWELLING_FACTOR[code.dwelling]


def _attributes(rng: np.random.Generator, meter_id: str, code: CategoryCode, scheme: CategoryScheme) -> HouseholdAttributes:
    dwelling = "H" if code.dwelling == "H" else "AP"
    edges = scheme.house_area_edges if dwelling == "H" else scheme.apartment_area_edges
    lo_area = {"H": 60, "AP": 25}[dwelling]
    bounds = [lo_area - 1, *[int(math.floor(e)) for e in edges], int(edges[-1]) + 120]
    area = int(rng.integers(bounds[code.area - 1] + 1, bounds[code.area] + 1))
    inc_bounds = [50_000, *[int(math.floor(e)) for e in scheme.income_edges], 900_000]
    income = int(rng.integers(inc_bounds[code.income - 1] + 1, inc_bounds[code.income] + 1))
    occupants = {"P1": 1, "P2": 2}.get(code.occupancy)
    if occupants is None:
        occupants = 3 + int(rng.random() < 0.6) if code.occupancy == "P3" else 5 + int(rng.random() < 0.3)
    rural = bool(rng.random() < (0.4 if code.hp else 0.15))
    children = 0 if occupants < 3 else int(rng.choice([0, 1, 2, 3], p=[0.03, 0.37, 0.58, 0.02]))
    return HouseholdAttributes(meter_id, dwelling, occupants, float(area), float(income), bool(code.ev), bool(code.hp), rural, children)


def _charger_for(rng: np.random.Generator, chargers: Mapping[str, ChargerClass]) -> ChargerClass:
    names = sorted(chargers)
    shares = np.array([chargers[n].share for n in names], dtype=np.float64)
    if shares.sum() <= 0:
        raise ValueError("charger shares sum to zero")
    return chargers[names[int(rng.choice(len(names), p=shares / shares.sum()))]]


def _charging(rng: np.random.Generator, cfg: SynthConfig, charger: ChargerClass, n_days: int, weekend: np.ndarray) -> np.ndarray:
    load = np.zeros(n_days * 24 + 48)
    days = np.arange(n_days)
    p = np.full(n_days, charger.plugin_probability)
    p[weekend] *= 0.85
    p[(days >= cfg.holiday_start) & (days < cfg.holiday_end)] *= charger.holiday_dip
    plug = rng.random(n_days) < p
    night = rng.random(n_days) < charger.night_share
    start = np.where(night, rng.normal(1.0, 1.0, n_days), rng.normal(charger.start_mean, charger.start_sd, n_days))
    energy = charger.battery * rng.uniform(0.4, 1.6, n_days) * (1 + 0.15 * _season(days))
    for d in np.nonzero(plug)[0]:
        t0 = int(d) * 24 + int(np.floor(start[d])) + (24 if night[d] else 0)
        t0 = min(max(t0, 0), len(load) - 1)
        full, rest = divmod(energy[d], charger.power)
        full = int(full)
        load[t0 : t0 + full] += charger.power
        if t0 + full < len(load):
            load[t0 + full] += rest
    return load[: n_days * 24]


@dataclass
class Household:
    attributes: HouseholdAttributes
    code: CategoryCode
    values: np.ndarray  # int32 thousandths
    clipped_low: int
    clipped_high: int


def generate_household(cfg: SynthConfig, index: int, code: CategoryCode, scheme: CategoryScheme = CategoryScheme()) -> Household:
    rng = _substream(cfg.seed, index)
    meter_id = f"m{index:06d}"
    attrs = _attributes(rng, meter_id, code, scheme)
    n_days = cfg.hours // 24
    days = np.arange(n_days)
    weekend = ((days + cfg.first_weekday) % 7) >= 5

    spread = max(0.3, 1.0 + cfg.household_spread * rng.standard_normal())
    shape = _base_shape(cfg)
    season = 1.0 + cfg.winter_amplitude * _season(days)
    daily = np.outer(season, shape)
    evening = cfg.evening_kwh * np.exp(-0.5 * ((np.arange(24) - cfg.evening_hour - 0.5) / 1.5) ** 2)
    daily += np.outer(cfg.lighting_amplitude * _season(days) * season, evening)
    daily[weekend, 8:16] *= cfg.weekend_factor
    # additive noise keeps the hour-by-hour spread symmetric around the household level
    base = daily * _size_factor(code) * (spread + cfg.noise * rng.standard_normal(daily.shape))
    load = base.ravel()
    if cfg.spike_probability > 0:
        spikes = rng.random(cfg.hours) < cfg.spike_probability
        load[spikes] += cfg.spike_kwh * rng.uniform(0.5, 1.5, int(spikes.sum()))

    if code.hp:
        h = cfg.heat
        hp_spread = max(0.2, 1.0 + h.spread * rng.standard_normal())
        level = np.maximum(0.0, h.baseload + h.amplitude * _season(days, h.phase_day)) * hp_spread
        heat = np.repeat(level, 24) + h.noise * rng.standard_normal(cfg.hours)
        load = load + np.maximum(heat, 0.0)
    if code.ev:
        load = load + _charging(rng, cfg, _charger_for(rng, cfg.chargers), n_days, weekend)

    milli = np.rint(load * MILLI).astype(np.int64)
    low = int(np.count_nonzero(milli < 1))
    high = int(np.count_nonzero(milli > CAP_MILLI))
    milli = np.clip(milli, 1, CAP_MILLI).astype(np.int32)
    if cfg.gap_rate > 0:
        milli[rng.random(cfg.hours) < cfg.gap_rate] = 0
    return Household(attrs, code, milli, low, high)


@dataclass
class SynthFleet:
    meter_ids: list[str]
    values: np.ndarray  # (n, H) int32
    attributes: list[HouseholdAttributes]
    codes: list[CategoryCode]
    clipped_low: int = 0
    clipped_high: int = 0

    def __len__(self) -> int:
        return len(self.meter_ids)

    def summary(self) -> dict:
        counts: dict[str, int] = {}
        for c in self.codes:
            counts[str(c)] = counts.get(str(c), 0) + 1
        return {
            "households": len(self),
            "hours": int(self.values.shape[1]),
            "clipped_low": self.clipped_low,
            "clipped_high": self.clipped_high,
            "counts": dict(sorted(counts.items())),
        }


def _generate_chunk(cfg: SynthConfig, start: int, plan: list[CategoryCode]):
    hh = [generate_household(cfg, start + i, code) for i, code in enumerate(plan)]
    block = np.stack([h.values for h in hh]) if hh else np.zeros((0, cfg.hours), dtype=np.int32)
    return block, [h.attributes for h in hh], sum(h.clipped_low for h in hh), sum(h.clipped_high for h in hh)


def generate_fleet(cfg: SynthConfig, workers: int = 1, chunk: int = 250) -> SynthFleet:
    plan = cfg.household_plan()
    n = len(plan)
    values = np.zeros((n, cfg.hours), dtype=np.int32)
    attributes: list[HouseholdAttributes] = []
    low = high = 0
    starts = list(range(0, n, chunk))
    jobs = [(cfg, s, plan[s : s + chunk]) for s in starts]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = pool.map(_generate_chunk, *zip(*jobs))
            parts = list(results)
    else:
        parts = [_generate_chunk(*job) for job in jobs]
    for s, (block, attrs, lo, hi) in zip(starts, parts):
        values[s : s + len(block)] = block
        attributes.extend(attrs)
        low += lo
        high += hi
    if low or high:
        logger.info("clipped %d low and %d high synthetic readings", low, high)
    return SynthFleet([a.meter_id for a in attributes], values, attributes, plan, low, high)


def default_workers() -> int:
    env = os.environ.get("PEAKPROFILE_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
