"""PNG figures for the report directory.

Rendering uses the Agg backend with a fixed font and no timestamp metadata,
so reruns produce the same bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from peakprofile import bands, stats  # noqa: E402

MONTHS = ("Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")
PNG_META = {"Software": None}
STYLE = {"font.family": "DejaVu Sans", "font.size": 8, "svg.hashsalt": "peakprofile", "path.simplify": False}


def _save(fig, path: Path, written: list[Path]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=100, metadata=PNG_META)
    plt.close(fig)
    written.append(path)


def heatmap(report: stats.PeakStatReport, path: Path, written: list[Path]) -> None:
    codes = sorted({r.category for r in report.rows}, key=str)
    means, _ = report.monthly_grid(codes)
    fig, ax = plt.subplots(figsize=(8, 0.3 * len(codes) + 1.5))
    im = ax.imshow(np.ma.masked_invalid(means), aspect="auto", cmap="viridis")
    ax.set_xticks(range(12), MONTHS)
    ax.set_yticks(range(len(codes)), [str(c) for c in codes])
    ax.set_title("Mean consumption in peak hours (kWh)")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    _save(fig, path, written)


def band_plot(prof: bands.DayBandProfile, path: Path, written: list[Path]) -> None:
    hours = np.arange(24)
    fig, ax = plt.subplots(figsize=(6, 4))
    cmap = plt.get_cmap("Blues")
    for i, p in enumerate(bands.PERCENTS[: len(bands.PERCENTS) // 2]):
        lo, hi = prof.band(p), prof.band(100 - p)
        ax.fill_between(hours, lo, hi, color=cmap(0.2 + 0.08 * i), linewidth=0)
    ax.plot(hours, prof.mean, color="black", label="mean")
    ax.plot(hours, prof.median, color="red", linestyle="--", label="median")
    ax.set_xlabel("hour of day")
    ax.set_ylabel("kWh")
    ax.set_title(f"{prof.category} day {prof.day}")
    ax.legend(loc="upper left")
    fig.tight_layout()
    _save(fig, path, written)


def coincidence_plot(series, path: Path, written: list[Path]) -> None:
    fig, ax = plt.subplots(figsize=(9, 3.5))
    for s in series:
        ax.plot(np.arange(len(s.probability)) / 24, s.probability, linewidth=0.4, label=f"> {s.threshold:g} kWh")
    ax.set_xlabel("day of year")
    ax.set_ylabel("share of households")
    ax.legend(loc="upper right")
    fig.tight_layout()
    _save(fig, path, written)


def ldc_plot(gross: np.ndarray, results: Mapping, fraction: float, unit: str, path: Path, written: list[Path]) -> None:
    scale = 1000.0 if unit == "MWh" else 1.0
    k = int(np.floor(fraction * len(gross) + 1e-9))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.sort(gross)[::-1][:k] / scale, color="black", label="gross")
    for res in results.values():
        ax.plot(res.up_ldc.values[:k] / scale, label=res.scenario.label)
    ax.set_xlabel("rank (hours)")
    ax.set_ylabel(unit)
    ax.legend(loc="upper right")
    fig.tight_layout()
    _save(fig, path, written)


def render_all(out: Path, ds, cfg, report, profiles, coinc, adoption, gross) -> list[Path]:
    from peakprofile.ldc import pick_unit

    written: list[Path] = []
    with plt.rc_context(STYLE):
        heatmap(report, out / "peak_heatmap.png", written)
        for code, prof in sorted(profiles.items(), key=lambda kv: str(kv[0])):
            if code in (cfg.code("base"), cfg.code("ev"), cfg.code("hp")):
                band_plot(prof, out / f"bands_{code.slug}_d{cfg.day:03d}.png", written)
        if coinc is not None:
            coincidence_plot(coinc[0], out / "coincidence.png", written)
        if adoption:
            unit = cfg.unit if cfg.unit != "auto" else pick_unit(gross.values)
            ldc_plot(gross.values, adoption, cfg.top_fraction, unit, out / "ldc_top_window.png", written)
    return written
