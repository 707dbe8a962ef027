import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peakprofile.errors import DomainError
from peakprofile.peaks import (
    GrossSeries,
    aggregate_gross,
    month_of_hour,
    monthly_partition,
    peak_count,
    read_gross,
    select_peak_hours,
    write_gross,
)


def test_sizes_on_standard_year(rng):
    g = GrossSeries(rng.random(8760))
    assert [select_peak_hours(g, f).size for f in (0.20, 0.05, 0.01)] == [1752, 438, 87]


def test_peak_count_guard():
    assert peak_count(0.2, 8760) == 1752
    assert peak_count(0.1, 30) == 3
    assert peak_count(0.7, 10) == 7  # 0.7 * 10 = 6.999...


def test_month_boundaries():
    m = month_of_hour(8760)
    assert m[0] == 0 and m[31 * 24 - 1] == 0 and m[31 * 24] == 1
    assert m[8759] == 11 and np.bincount(m).tolist()[1] == 28 * 24
    leap = month_of_hour(8784)
    assert np.bincount(leap).tolist()[1] == 29 * 24


def test_ties_go_to_earlier_hour():
    g = GrossSeries(np.ones(100))
    assert select_peak_hours(g, 0.05).hours.tolist() == [0, 1, 2, 3, 4]


def test_fraction_domain():
    g = GrossSeries(np.ones(10))
    for f in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            select_peak_hours(g, f)


def test_gross_validation():
    with pytest.raises(DomainError):
        GrossSeries(np.array([1.0, -1.0]))
    with pytest.raises(DomainError):
        GrossSeries(np.array([1.0, np.nan]))


@settings(max_examples=60, deadline=None)
@given(st.integers(24, 400), st.integers(0, 2**32 - 1), st.sampled_from([0.2, 0.05, 0.01, 0.33]))
def test_boundary_and_partition(n, seed, frac):
    rng = np.random.default_rng(seed)
    # coarse values force ties
    x = rng.integers(0, 20, n).astype(float)
    cal = select_peak_hours(GrossSeries(x), frac)
    sel = np.zeros(n, bool)
    sel[cal.hours] = True
    assert cal.size == int(np.floor(frac * n + 1e-9))
    if cal.size and cal.size < n:
        assert x[sel].min() >= x[~sel].max()
    # brute force oracle: sort by (-value, hour)
    order = sorted(range(n), key=lambda h: (-x[h], h))[: cal.size]
    assert sorted(order) == cal.hours.tolist()
    parts = monthly_partition(cal)
    assert sum(len(p) for p in parts) == cal.size == sum(cal.monthly_counts)


def test_aggregate_gross_skips_gaps():
    v = np.array([[1000, 0, 500], [2000, 300, 0]], dtype=np.int32)
    assert aggregate_gross(v).values.tolist() == [3.0, 0.3, 0.5]


def test_gross_file_round_trip(tmp_path):
    p = tmp_path / "g.csv"
    write_gross(p, [1.5, 2.25, 0.0])
    assert read_gross(p).values.tolist() == [1.5, 2.25, 0.0]


def test_calendar_json_keys(rng):
    import json

    cal = select_peak_hours(GrossSeries(rng.random(8760)), 0.2)
    doc = json.loads(cal.to_json())
    assert list(doc) == ["fraction", "hours", "monthly_counts"]
    assert doc["hours"] == sorted(doc["hours"]) and len(doc["hours"]) == 1752
