import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from peakprofile.bands import PERCENTS, day_bands, skewness_diagnostic
from peakprofile.errors import DomainError
from peakprofile.quantile import nearest_rank, rank
from tests.conftest import random_profiles


def oracle(sample, p):
    s = sorted(sample)
    return s[max(1, math.ceil(p * len(s) / 100)) - 1]


def test_rank_small_cases():
    assert rank(1, 5) == 1
    assert rank(10, 50) == 5 and rank(11, 50) == 6
    assert rank(20, 5) == 1 and rank(21, 5) == 2
    assert rank(100, 95) == 95
    with pytest.raises(ValueError):
        rank(0, 50)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 5000), min_size=1, max_size=300), st.integers(1, 100))
def test_nearest_rank_matches_sort(sample, p):
    assert nearest_rank(np.sort(sample), p) == oracle(sample, p)


def test_bands_match_oracle_per_hour(rng):
    x = random_profiles(rng, 257, 24 * 10, gap_rate=0.1)
    prof = day_bands(x, 4)
    for h in range(24):
        col = x[:, 4 * 24 + h]
        col = col[col > 0]
        assert prof.n[h] == col.size
        for p in PERCENTS:
            assert prof.band(p)[h] == oracle(col, p) / 1000
        assert prof.median[h] == oracle(col, 50) / 1000
        assert prof.mean[h] == pytest.approx(col.mean() / 1000, rel=1e-12)
        assert prof.std[h] == pytest.approx(col.std() / 1000, rel=1e-9)


def test_sketch_equals_exact(rng):
    x = random_profiles(rng, 300, 24 * 6, gap_rate=0.05)
    a, b = day_bands(x, 2), day_bands(x, 2, sketch=True)
    np.testing.assert_array_equal(a.quantiles, b.quantiles)
    np.testing.assert_array_equal(a.median, b.median)


def test_sketch_merges():
    from peakprofile.bands import HourHistograms

    rng = np.random.default_rng(9)
    sub = random_profiles(rng, 80, 24)
    whole = HourHistograms.from_matrix(sub)
    merged = HourHistograms.from_matrix(sub[:30]).merge(HourHistograms.from_matrix(sub[30:]))
    np.testing.assert_array_equal(whole.quantile(95), merged.quantile(95))


def test_hour_without_data_is_nan():
    x = np.full((3, 48), 100, dtype=np.int32)
    x[:, 24 + 5] = 0
    prof = day_bands(x, 1)
    assert math.isnan(prof.band(50)[5]) and prof.n[5] == 0
    assert ",,," in prof.to_csv().splitlines()[6]


def test_day_domain():
    with pytest.raises(DomainError):
        day_bands(np.ones((2, 48), dtype=np.int32), 2)
    with pytest.raises(DomainError):
        day_bands(np.ones((0, 48), dtype=np.int32), 0)


def test_csv_layout(rng):
    prof = day_bands(random_profiles(rng, 30, 48), 0)
    head = prof.to_csv().splitlines()[0].split(",")
    assert head[0] == "hour" and head[1] == "q05" and head[19] == "q95" and head[-4:] == ["mean", "median", "std", "n"]
    assert len(prof.to_csv().splitlines()) == 25


def test_skewness_against_scipy(rng):
    x = rng.lognormal(0, 0.7, 501)
    d = skewness_diagnostic(x)
    assert d.third_moment == pytest.approx(sps.skew(x), rel=1e-10)
    assert d.mean > d.median and d.third_moment > 0
    flat = skewness_diagnostic(np.ones(5))
    assert flat.third_moment is None and flat.mean_median_gap == 0
