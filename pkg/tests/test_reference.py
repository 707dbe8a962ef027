"""Integrity of the transcribed reference tables and their rendering in report formats."""

import os
from pathlib import Path

import pytest

from peakprofile import reference as ref
from peakprofile.stats import AnnualStat, annual_means_csv
from peakprofile.taxonomy import CategoryCode, enumerate_codes
from peakprofile.welch import ResamplingReport, resampling_csv

GOLDEN = Path(__file__).parent / "golden"


def snapshot(name: str, text: str) -> None:
    path = GOLDEN / name
    if os.environ.get("PEAKPROFILE_REGEN_GOLDEN"):
        path.write_text(text, encoding="utf-8")
    assert text == path.read_text(encoding="utf-8")


def test_tables_validate():
    assert ref.validate() == []


def test_monthly_peak_hours_discrepancy():
    assert sum(ref.PEAK_HOURS_BY_MONTH) == 1747
    assert ref.EXPECTED_TOP20_HOURS == 1752
    # winter heavy, empty July
    assert ref.PEAK_HOURS_BY_MONTH[0] == max(ref.PEAK_HOURS_BY_MONTH) and ref.PEAK_HOURS_BY_MONTH[6] == 0


def test_category_profiles():
    counts = {p.code: p.count for p in ref.CATEGORY_PROFILES}
    assert counts["H_P3_A3_€3_EV0_HP0"] == ref.ADOPTION_BASE_COUNT == 54445
    assert counts["H_P3_A3_€3_EV1_HP0"] == 265 and counts["H_P3_A3_€3_EV0_HP1"] == 635
    assert all(CategoryCode.parse(c) in set(enumerate_codes()) for c in counts)


def test_annual_table_shape():
    codes = [CategoryCode.parse(c) for c in ref.ANNUAL_HOURLY_MEANS]
    assert len(codes) == 54  # 19 rows x 3 incomes, three cells suppressed
    assert "H_P2_A3_€1_EV0_HP0" not in ref.ANNUAL_HOURLY_MEANS
    assert ref.ANNUAL_HOURLY_MEANS["H_P5+_A3_€1_EV0_HP0"] == 0.733
    assert ref.ANNUAL_HOURLY_MEANS["Ap_P3_A3_€3_EV0_HP0"] == 0.359


def test_pick_directions():
    hp, ev = ref.PICK_AVERAGES["HP"], ref.PICK_AVERAGES["EV"]
    for lvl in ("20%", "5%", "1%"):
        assert hp[lvl][0] > ev[lvl][0] > ref.PICK_AVERAGES["noEV"][lvl][0]
        assert ev[lvl][1] > hp[lvl][1]  # EV picks are the more dispersed
    assert set(ref.ACCEPTANCE_RATES.values()) == {0.0}


def test_adoption_window_ordering():
    ev, hp = ref.ADOPTION_WINDOW["EV"], ref.ADOPTION_WINDOW["HP"]
    assert ev["max"] >= ev["mean"] >= ev["median"]
    assert hp["max"] > ev["max"] and hp["median"] > ev["median"]


def test_annual_table_snapshot():
    stats = [AnnualStat(CategoryCode.parse(c), 0, v) for c, v in sorted(ref.ANNUAL_HOURLY_MEANS.items())]
    snapshot("reference_annual_means.csv", annual_means_csv(stats))


def test_pick_table_snapshot():
    rows = []
    for a, b in ref.PICK_PAIRS:
        for lvl in ("20%", "5%", "1%"):
            (ma, va), (mb, vb) = ref.PICK_AVERAGES[a][lvl], ref.PICK_AVERAGES[b][lvl]
            n_a = ref.ADOPTION_BASE_COUNT if a.startswith("no") else 635
            n_b = {"HP": 635, "EV": 265}[b]
            rate = ref.ACCEPTANCE_RATES[(a, b, lvl)]
            rows.append((f"{a}-{b}", lvl, ResamplingReport(50, n_a, n_b, ma, mb, va, vb, rate, 0, 0.05)))
    text = resampling_csv(rows)
    assert text.count("\n") == 10
    snapshot("reference_welch.csv", text)


@pytest.mark.parametrize("month,count", list(enumerate(ref.PEAK_HOURS_BY_MONTH, start=1)))
def test_monthly_counts_are_feasible(month, count):
    days = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)[month - 1]
    assert 0 <= count <= days * 24
