"""Command-line entry point: ``peakprofile <command> [options]``.

Analysis commands take their households either from ``--readings`` plus
``--attributes`` files or, when those are absent, from a synthetic fleet
described by ``--config`` (the bundled demo configuration by default).
Settings in the configuration file are overridden by command-line flags.

Exit status: 0 success, 1 usage error, 2 input format error, 3 domain error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from peakprofile import __version__, bands, coincidence, peaks, pipeline, stats, welch
from peakprofile.errors import DomainError, FormatError
from peakprofile.ingest import read_readings, write_readings
from peakprofile.synth import (
    default_config_path,
    default_workers,
    generate_fleet,
    read_config,
    synth_config_from_mapping,
)
from peakprofile.taxonomy import apply_privacy_filter, build_category_table, read_attributes, write_attributes

logger = logging.getLogger("peakprofile")

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_DOMAIN = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fraction_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _existing(text: str) -> Path:
    p = Path(text)
    if not p.is_file():
        raise argparse.ArgumentTypeError(f"no such file: {text}")
    return p


def _add_common(p: argparse.ArgumentParser, inputs: bool = True) -> None:
    p.add_argument("--config", type=_existing, help="key = value settings file (default: bundled demo)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="seed for the synthetic fleet and the resampling")
    p.add_argument("--workers", type=int, default=None, help="worker count (default: PEAKPROFILE_WORKERS or cores)")
    p.add_argument("--scale", type=float, help="multiply every synthetic category count")
    p.add_argument("-v", "--verbose", action="store_true")
    if inputs:
        p.add_argument("--readings", type=_existing, help="readings CSV (meter_id,hour,kwh)")
        p.add_argument("--attributes", type=_existing, help="attributes CSV")
        p.add_argument("--gross", type=_existing, help="external gross CSV (hour,kwh)")
        p.add_argument("--hours", type=int, help="hours per profile (default 8760)")
        p.add_argument("--privacy-k", type=int, dest="privacy_k", help="minimum category size")
        p.add_argument("--fractions", type=_fraction_list, help="peak fractions, e.g. 0.2,0.05,0.01")
        p.add_argument("--base", help="reference category code")
        p.add_argument("--ev", help="EV category code")
        p.add_argument("--hp", help="heat-pump category code")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="peakprofile", description="Peak-hour load profile analytics for household meter data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic fleet as readings and attributes CSV")
    _add_common(p, inputs=False)

    p = sub.add_parser("ingest", help="clean a readings file and write the cleaning report")
    _add_common(p, inputs=False)
    p.add_argument("--readings", type=_existing, required=True)
    p.add_argument("--hours", type=int)
    p.add_argument("--max-gaps", type=int, default=1000, dest="max_gaps")

    p = sub.add_parser("categorize", help="assign households to categories")
    _add_common(p, inputs=False)
    p.add_argument("--attributes", type=_existing, required=True)
    p.add_argument("--privacy-k", type=int, dest="privacy_k")

    p = sub.add_parser("peaks", help="select the peak-hour calendars")
    _add_common(p)
    p.add_argument("--fraction", type=float, action="append", help="single peak fraction (repeatable)")

    p = sub.add_parser("stats", help="peak-hour, annual and maximum statistics per category")
    _add_common(p)

    p = sub.add_parser("welch", help="repeated Welch tests between category pairs")
    _add_common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--sample-unit", choices=("pooled", "household"), dest="sample_unit")
    p.add_argument("--no-replace", action="store_false", dest="replace", default=None)

    p = sub.add_parser("bands", help="percentile bands of one day per category")
    _add_common(p)
    p.add_argument("--day", type=int, help="0-based day of year (default 4)")
    p.add_argument("--sketch", action="store_true", help="use mergeable per-hour histograms")

    p = sub.add_parser("coincidence", help="threshold-exceedance series of the EV category")
    _add_common(p)
    p.add_argument("--thresholds", type=_fraction_list)

    p = sub.add_parser("ldc", help="load duration curves of whole-category adoption")
    _add_common(p)
    p.add_argument("--unit", choices=("auto", "kWh", "MWh"))

    p = sub.add_parser("report", help="run every analysis and write all outputs")
    _add_common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--day", type=int)
    p.add_argument("--thresholds", type=_fraction_list)
    p.add_argument("--unit", choices=("auto", "kWh", "MWh"))
    p.add_argument("--no-figures", action="store_false", dest="figures", default=None)
    return parser


ANALYSES = ("stats", "welch", "bands", "coincidence", "ldc", "report")
RUN_FLAGS = (
    "privacy_k", "fractions", "base", "ev", "hp", "alpha", "repetitions", "sample_unit",
    "replace", "day", "thresholds", "unit", "figures", "hours",
)


def resolve(args: argparse.Namespace):
    """Merge the configuration file and flags into (RunConfig, SynthConfig)."""
    path = args.config or default_config_path()
    values = read_config(path)
    run_kw = pipeline.run_overrides(values)
    synth_values = {k: v for k, v in values.items() if k not in pipeline.RUN_KEYS}
    synth_cfg = synth_config_from_mapping(synth_values)
    if args.seed is not None:
        synth_cfg = replace(synth_cfg, seed=args.seed)
    if args.scale is not None:
        synth_cfg = replace(synth_cfg, scale=args.scale)
    run_kw["seed"] = synth_cfg.seed
    run_kw["hours"] = synth_cfg.hours
    for name in RUN_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            run_kw[name] = value
    if getattr(args, "fraction", None):
        run_kw["fractions"] = tuple(args.fraction)
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        raise UsageError("--workers must be >= 1")
    run = pipeline.RunConfig(
        readings=getattr(args, "readings", None),
        attributes=getattr(args, "attributes", None),
        gross=getattr(args, "gross", None),
        out_dir=args.out,
        workers=workers,
        **run_kw,
    )
    if args.command in ANALYSES and (run.readings is None) != (run.attributes is None):
        raise UsageError("--readings and --attributes must be given together")
    return run, synth_cfg


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


# -- commands -------------------------------------------------------------------


def cmd_synth(args, run, synth_cfg) -> str:
    fleet = generate_fleet(synth_cfg, workers=run.workers)
    out = run.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_readings(out / "readings.csv", fleet.meter_ids, fleet.values)
    write_attributes(out / "attributes.csv", fleet.attributes)
    _write(out / "synth_summary.json", json.dumps(fleet.summary(), indent=2, ensure_ascii=False) + "\n")
    return f"synth: {len(fleet)} households x {synth_cfg.hours} hours -> {out}"


def cmd_ingest(args, run, synth_cfg) -> str:
    hours = args.hours or run.hours
    fleet, report, diags = read_readings(args.readings, hours, args.max_gaps)
    _write(run.out_dir / "cleaning_report.json", report.to_json())
    if diags:
        _write(run.out_dir / "diagnostics.txt", "".join(f"{d}\n" for d in diags))
    return f"ingest: accepted {report.accepted}, rejected {report.rejected}, {len(diags)} diagnostics"


def cmd_categorize(args, run, synth_cfg) -> str:
    attrs = read_attributes(args.attributes)
    table = apply_privacy_filter(build_category_table(attrs, run.scheme()), run.privacy_k)
    _write(run.out_dir / "category_table.json", table.to_json())
    return f"categorize: {len(table.entries)} categories, {len(table.excluded)} excluded, {len(table.suppressed)} suppressed"


def cmd_peaks(args, run, synth_cfg) -> str:
    if run.gross is not None and run.readings is None:
        gross = peaks.read_gross(run.gross)
    else:
        gross = pipeline.gross_series(pipeline.load_dataset(run, synth_cfg), run)
    sizes = []
    for f in sorted(run.fractions, reverse=True):
        cal = peaks.select_peak_hours(gross, f)
        _write(run.out_dir / f"peak_calendar_{pipeline.level_tag(f)}.json", cal.to_json())
        sizes.append(f"{stats.level_label(f)}={cal.size}")
    return f"peaks: {', '.join(sizes)} of {gross.hours} hours"


def cmd_stats(args, run, synth_cfg) -> str:
    ds = pipeline.load_dataset(run, synth_cfg)
    cals = pipeline.calendars(ds, run)
    groups = ds.groups()
    hourly = pipeline.hourly_accumulators(ds)
    report = stats.peak_stats(groups, cals[run.top_fraction], hourly)
    others = [c for f, c in cals.items() if f != run.top_fraction]
    for (code, label), acc in sorted(stats.yearly_level_stats(groups, others, hourly).items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
        report.rows.append(stats.PeakStat(code, label, acc.count, acc.mean, acc.std))
    _write(run.out_dir / "peak_stats.csv", report.to_csv())
    _write(run.out_dir / "annual_means.csv", stats.annual_means_csv(stats.annual_means(groups)))
    _write(run.out_dir / "maxima.json", stats.maxima_json({c: stats.household_maxima(x) for c, x in groups.items()}))
    return f"stats: {len(groups)} categories over {len(cals)} peak levels"


def cmd_welch(args, run, synth_cfg) -> str:
    ds = pipeline.load_dataset(run, synth_cfg)
    rows = pipeline.welch_rows(ds, run, pipeline.calendars(ds, run))
    if not rows:
        raise DomainError("no category pair available for testing")
    _write(run.out_dir / "welch.csv", welch.resampling_csv(rows))
    rates = ", ".join(f"{pair}@{lvl}={rep.acceptance_rate:g}" for pair, lvl, rep in rows)
    return f"welch: acceptance {rates}"


def cmd_bands(args, run, synth_cfg) -> str:
    ds = pipeline.load_dataset(run, synth_cfg)
    n = 0
    for code, x in sorted(ds.groups().items(), key=lambda kv: str(kv[0])):
        prof = bands.day_bands(x, run.day, code, sketch=args.sketch)
        _write(run.out_dir / f"bands_{code.slug}_d{run.day:03d}.csv", prof.to_csv())
        n += 1
    return f"bands: {n} categories on day {run.day}"


def cmd_coincidence(args, run, synth_cfg) -> str:
    ds = pipeline.load_dataset(run, synth_cfg)
    series, summaries, _, doc = pipeline.coincidence_outputs(ds, run)
    slug = run.code("ev").slug
    _write(run.out_dir / f"coincidence_{slug}.csv", series[0].to_csv() + "".join(s.to_csv(header=False) for s in series[1:]))
    _write(run.out_dir / "coincidence_summary.json", doc)
    peaks_txt = ", ".join(f">{s.threshold:g} kWh max {s.year_max:.3f}" for s in summaries)
    return f"coincidence: {peaks_txt}"


def cmd_ldc(args, run, synth_cfg) -> str:
    ds = pipeline.load_dataset(run, synth_cfg)
    gross = pipeline.gross_series(ds, run)
    results = pipeline.adoption_results(ds, run, gross)
    if not results:
        raise DomainError("neither adopter category is present")
    from peakprofile.ldc import compare_windows, pick_unit

    unit = run.unit if run.unit != "auto" else pick_unit(gross.values)
    for name, res in results.items():
        comparison = None
        if name == "ev" and "hp" in results:
            comparison = {"versus": results["hp"].scenario.label, "percent_higher": compare_windows(res.window, results["hp"].window)}
        slug = res.scenario.adopter_code.slug
        _write(run.out_dir / f"ldc_series_{slug}.csv", res.series_csv(unit))
        _write(run.out_dir / f"ldc_rank_{slug}.csv", res.ldc_csv(unit))
        _write(run.out_dir / f"ldc_stats_{slug}.json", res.stats_json(unit, comparison))
    scale = 1000.0 if unit == "MWh" else 1.0
    parts = ", ".join(f"{r.scenario.label} max {r.window.max / scale:.1f} {unit}" for r in results.values())
    return f"ldc: {parts}"


def cmd_report(args, run, synth_cfg) -> str:
    ds = pipeline.load_dataset(run, synth_cfg)
    written = pipeline.write_report(ds, run)
    return f"report: {len(ds.fleet)} households, {len(ds.table.entries)} categories, {len(written)} files -> {run.out_dir}"


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "categorize": cmd_categorize,
    "peaks": cmd_peaks,
    "stats": cmd_stats,
    "welch": cmd_welch,
    "bands": cmd_bands,
    "coincidence": cmd_coincidence,
    "ldc": cmd_ldc,
    "report": cmd_report,
}


def run_command(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        run, synth_cfg = resolve(args)
        print(COMMANDS[args.command](args, run, synth_cfg))
    except UsageError as exc:
        print(f"peakprofile: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FormatError as exc:
        print(f"peakprofile: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except DomainError as exc:
        print(f"peakprofile: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"peakprofile: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
