"""End-to-end analysis: load a fleet, group it, and write every report file."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from peakprofile import bands, coincidence, ingest, ldc, peaks, stats, welch
from peakprofile.errors import DomainError, FormatError
from peakprofile.ingest import CleaningReport, Fleet
from peakprofile.synth import SynthConfig, SynthFleet, generate_fleet
from peakprofile.taxonomy import (
    CategoryCode,
    CategoryScheme,
    CategoryTable,
    HouseholdAttributes,
    apply_privacy_filter,
    build_category_table,
)
from peakprofile.units import MILLI

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    readings: Path | None = None
    attributes: Path | None = None
    gross: Path | None = None
    out_dir: Path = Path("out")
    fractions: tuple[float, ...] = peaks.LEVELS
    alpha: float = welch.DEFAULT_ALPHA
    repetitions: int = welch.DEFAULT_REPS
    seed: int = 0
    privacy_k: int = 20
    day: int = bands.REFERENCE_DAY
    thresholds: tuple[float, ...] = coincidence.DEFAULT_THRESHOLDS
    base: str = "H_P3_A3_€3_EV0_HP0"
    ev: str = "H_P3_A3_€3_EV1_HP0"
    hp: str = "H_P3_A3_€3_EV0_HP1"
    unit: str = "auto"
    sample_unit: str = "pooled"  # or "household"
    replace: bool = True
    hours: int = ingest.HOURS_PER_YEAR
    workers: int = 1
    figures: bool = True

    def __post_init__(self) -> None:
        if not self.fractions or any(not 0 < f < 1 for f in self.fractions):
            raise DomainError("peak fractions must lie in (0, 1)")
        if not 0 < self.alpha < 1:
            raise DomainError("alpha must lie in (0, 1)")
        if self.unit not in ("auto", "kWh", "MWh"):
            raise DomainError("unit must be auto, kWh or MWh")
        if self.sample_unit not in ("pooled", "household"):
            raise DomainError("sample_unit must be pooled or household")
        for name in ("base", "ev", "hp"):
            try:
                CategoryCode.parse(getattr(self, name))
            except ValueError as exc:
                raise FormatError(f"{name}: {exc}") from None

    @property
    def top_fraction(self) -> float:
        return max(self.fractions)

    def scheme(self) -> CategoryScheme:
        return CategoryScheme(privacy_k=self.privacy_k)

    def code(self, name: str) -> CategoryCode:
        return CategoryCode.parse(getattr(self, name))


RUN_KEYS = {
    "fractions": lambda v: tuple(float(x) for x in v.split(",")),
    "alpha": float,
    "repetitions": int,
    "privacy_k": int,
    "day": int,
    "thresholds": lambda v: tuple(float(x) for x in v.split(",")),
    "base": str,
    "ev": str,
    "hp": str,
    "unit": str,
    "sample_unit": str,
    "replace": lambda v: v.lower() in ("1", "true", "yes"),
    "figures": lambda v: v.lower() in ("1", "true", "yes"),
}


def run_overrides(values: Mapping[str, str]) -> dict:
    out = {}
    for key, conv in RUN_KEYS.items():
        if key in values:
            try:
                out[key] = conv(values[key])
            except ValueError:
                raise FormatError(f"bad value for {key!r}: {values[key]!r}") from None
    return out


@dataclass
class Dataset:
    fleet: Fleet
    table: CategoryTable
    cleaning: CleaningReport
    synthetic: SynthFleet | None = None
    diagnostics: list = field(default_factory=list)
    _groups: dict | None = field(default=None, repr=False)

    @property
    def hours(self) -> int:
        return self.fleet.hours

    def groups(self) -> dict[CategoryCode, np.ndarray]:
        if self._groups is None:
            self._groups = {c: self.fleet.rows(self.table[c].members) for c in self.table.codes()}
        return self._groups

    def group(self, code: CategoryCode) -> np.ndarray:
        groups = self.groups()
        if code not in groups:
            raise DomainError(f"category {code} is not present (empty or suppressed)")
        return groups[code]


def _table_for(fleet: Fleet, attrs: Sequence[HouseholdAttributes], scheme: CategoryScheme) -> CategoryTable:
    present = set(fleet.meter_ids)
    known = [a for a in attrs if a.meter_id in present]
    missing = len(present) - len(known)
    if missing:
        logger.warning("%d accepted meters have no attributes and are left out", missing)
    table = build_category_table(known, scheme)
    return apply_privacy_filter(table, scheme.privacy_k)


def dataset_from_synth(synth: SynthFleet, cfg: RunConfig) -> Dataset:
    fleet, report = ingest.clean_matrix(synth.meter_ids, synth.values)
    return Dataset(fleet, _table_for(fleet, synth.attributes, cfg.scheme()), report, synth)


def dataset_from_files(cfg: RunConfig) -> Dataset:
    from peakprofile.taxonomy import read_attributes

    if cfg.readings is None or cfg.attributes is None:
        raise DomainError("both readings and attributes are needed")
    fleet, report, diags = ingest.read_readings(cfg.readings, cfg.hours)
    attrs = read_attributes(cfg.attributes)
    return Dataset(fleet, _table_for(fleet, attrs, cfg.scheme()), report, None, diags)


def load_dataset(cfg: RunConfig, synth_cfg: SynthConfig | None) -> Dataset:
    if cfg.readings is not None or cfg.attributes is not None:
        return dataset_from_files(cfg)
    if synth_cfg is None:
        raise DomainError("no input: give readings and attributes or a fleet configuration")
    return dataset_from_synth(generate_fleet(synth_cfg, workers=cfg.workers), cfg)


# -- individual analyses ----------------------------------------------------------


def gross_series(ds: Dataset, cfg: RunConfig) -> peaks.GrossSeries:
    if cfg.gross is not None:
        g = peaks.read_gross(cfg.gross)
        if g.hours != ds.hours:
            raise DomainError(f"external gross has {g.hours} hours, fleet has {ds.hours}")
        return g
    return peaks.aggregate_gross(ds.fleet.values)


def calendars(ds: Dataset, cfg: RunConfig) -> dict[float, peaks.PeakCalendar]:
    g = gross_series(ds, cfg)
    return {f: peaks.select_peak_hours(g, f) for f in sorted(cfg.fractions, reverse=True)}


def hourly_accumulators(ds: Dataset) -> dict[CategoryCode, stats.HourlyAccumulator]:
    return {c: stats.HourlyAccumulator.from_matrix(x) for c, x in ds.groups().items()}


def level_observations(values: np.ndarray, cal: peaks.PeakCalendar, unit: str) -> np.ndarray:
    """kWh observations of a group over a calendar: pooled values or household means."""
    sub = values[:, cal.hours]
    if unit == "household":
        n = np.count_nonzero(sub, axis=1)
        s = sub.sum(axis=1, dtype=np.int64)
        ok = n > 0
        return s[ok] / n[ok] / MILLI
    return sub[sub > 0] / MILLI


WELCH_PAIRS = (("noHP-HP", "base", "hp"), ("noEV-EV", "base", "ev"), ("HP-EV", "hp", "ev"))


def welch_rows(ds: Dataset, cfg: RunConfig, cals: Mapping[float, peaks.PeakCalendar]):
    rows = []
    for pair, a_name, b_name in WELCH_PAIRS:
        a_code, b_code = cfg.code(a_name), cfg.code(b_name)
        if a_code not in ds.table or b_code not in ds.table:
            logger.warning("skipping %s: category missing", pair)
            continue
        xa, xb = ds.group(a_code), ds.group(b_code)
        n_a, n_b = ds.table[a_code].count, ds.table[b_code].count
        for f, cal in cals.items():
            rep = welch.resampling_protocol(
                level_observations(xa, cal, cfg.sample_unit),
                level_observations(xb, cal, cfg.sample_unit),
                n_a,
                n_b,
                reps=cfg.repetitions,
                alpha=cfg.alpha,
                seed=cfg.seed,
                replace=cfg.replace,
                workers=cfg.workers,
            )
            rows.append((pair, stats.level_label(f), rep))
    return rows


def band_profiles(ds: Dataset, cfg: RunConfig) -> dict[CategoryCode, bands.DayBandProfile]:
    return {c: bands.day_bands(x, cfg.day, c) for c, x in ds.groups().items()}


def coincidence_outputs(ds: Dataset, cfg: RunConfig):
    ev_code, base_code = cfg.code("ev"), cfg.code("base")
    x = ds.group(ev_code)
    series = [coincidence.exceedance_series(x, t, ev_code) for t in cfg.thresholds]
    summaries = [coincidence.coincidence_summary(s) for s in series]
    baseline = None
    if base_code in ds.table:
        baseline = coincidence.baseline_rates(ds.group(base_code), cfg.thresholds)
    doc = coincidence.summary_json(summaries, baseline, str(ev_code), str(base_code))
    return series, summaries, baseline, doc


def adoption_results(ds: Dataset, cfg: RunConfig, gross: peaks.GrossSeries):
    base_code = cfg.code("base")
    base = ds.group(base_code)
    base_agg = base.sum(axis=0, dtype=np.int64) / MILLI
    results = {}
    for name in ("ev", "hp"):
        code = cfg.code(name)
        if code not in ds.table:
            continue
        adopter = ds.group(code)
        scenario = ldc.AdoptionScenario(base_code, code, base.shape[0], adopter.shape[0])
        agg = adopter.sum(axis=0, dtype=np.int64) / MILLI
        results[name] = ldc.extrapolate_adoption(gross.values, base_agg, agg, scenario, cfg.top_fraction)
    return results


# -- report -------------------------------------------------------------------------


def _write(path: Path, text: str, written: list[Path]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    written.append(path)


def _json(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def level_tag(fraction: float) -> str:
    return f"p{fraction * 100:g}".replace(".", "_")


def write_report(ds: Dataset, cfg: RunConfig) -> list[Path]:
    """Run every analysis and write its files under ``cfg.out_dir``."""
    out = cfg.out_dir
    written: list[Path] = []
    _write(out / "cleaning_report.json", ds.cleaning.to_json(), written)
    _write(out / "category_table.json", ds.table.to_json(), written)

    gross = gross_series(ds, cfg)
    cals = {f: peaks.select_peak_hours(gross, f) for f in sorted(cfg.fractions, reverse=True)}
    for f, cal in cals.items():
        _write(out / f"peak_calendar_{level_tag(f)}.json", cal.to_json(), written)

    hourly = hourly_accumulators(ds)
    groups = ds.groups()
    top = cals[cfg.top_fraction]
    report = stats.peak_stats(groups, top, hourly)
    levels = stats.yearly_level_stats(groups, [c for f, c in cals.items() if f != cfg.top_fraction], hourly)
    for (code, label), acc in sorted(levels.items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
        report.rows.append(stats.PeakStat(code, label, acc.count, acc.mean, acc.std))
    _write(out / "peak_stats.csv", report.to_csv(), written)
    annual = stats.annual_means(groups)
    _write(out / "annual_means.csv", stats.annual_means_csv(annual), written)
    maxima = {c: stats.household_maxima(x) for c, x in groups.items()}
    _write(out / "maxima.json", stats.maxima_json(maxima), written)

    rows = welch_rows(ds, cfg, cals)
    _write(out / "welch.csv", welch.resampling_csv(rows), written)

    profiles = band_profiles(ds, cfg)
    for code, prof in sorted(profiles.items(), key=lambda kv: str(kv[0])):
        _write(out / f"bands_{code.slug}_d{cfg.day:03d}.csv", prof.to_csv(), written)

    coinc = None
    if cfg.code("ev") in ds.table:
        coinc = coincidence_outputs(ds, cfg)
        series, _, _, doc = coinc
        text = series[0].to_csv() + "".join(s.to_csv(header=False) for s in series[1:])
        _write(out / f"coincidence_{cfg.code('ev').slug}.csv", text, written)
        _write(out / "coincidence_summary.json", doc, written)

    adoption = {}
    if cfg.code("base") in ds.table:
        adoption = adoption_results(ds, cfg, gross)
        unit = cfg.unit if cfg.unit != "auto" else ldc.pick_unit(gross.values)
        windows = {k: r.window for k, r in adoption.items()}
        for name, res in adoption.items():
            other = "hp" if name == "ev" else "ev"
            comparison = None
            if other in windows and name == "ev":
                comparison = {"versus": str(adoption[other].scenario.label), "percent_higher": ldc.compare_windows(windows["ev"], windows["hp"])}
            slug = res.scenario.adopter_code.slug
            _write(out / f"ldc_series_{slug}.csv", res.series_csv(unit), written)
            _write(out / f"ldc_rank_{slug}.csv", res.ldc_csv(unit), written)
            _write(out / f"ldc_stats_{slug}.json", res.stats_json(unit, comparison), written)

    if ds.synthetic is not None:
        from peakprofile.calibration import calibration_report

        _write(out / "calibration.json", _json(calibration_report(ds, cfg, cals=cals, hourly=hourly)), written)

    if cfg.figures:
        from peakprofile import plots

        written.extend(plots.render_all(out / "figures", ds, cfg, report, profiles, coinc, adoption, gross))
    return written
