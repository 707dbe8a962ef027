import json
import math

import numpy as np
import pytest

from peakprofile.coincidence import (
    baseline_rates,
    coincidence_summary,
    exceedance_series,
    net_series,
    summary_json,
)
from peakprofile.errors import DomainError
from tests.conftest import random_profiles


def brute(values, threshold_kwh):
    n = values.shape[1]
    out = []
    for h in range(n):
        col = [int(v) for v in values[:, h] if v > 0]
        hits = sum(1 for v in col if v > round(threshold_kwh * 1000))
        out.append((hits, len(col)))
    return out


def test_counts_equal_brute_force(rng):
    x = random_profiles(rng, 50, 96, gap_rate=0.2)
    x[x > 0] *= 4
    for thr in (3.0, 4.0):
        s = exceedance_series(x, thr)
        assert list(zip(s.exceed.tolist(), s.denominator.tolist())) == brute(x, thr)
        expected = [h / d if d else math.nan for h, d in brute(x, thr)]
        np.testing.assert_array_equal(s.probability, np.array(expected))


def test_threshold_is_strict():
    x = np.array([[3000, 3001, 0]], dtype=np.int32)
    s = exceedance_series(x, 3.0)
    assert s.exceed.tolist() == [0, 1, 0] and s.denominator.tolist() == [1, 1, 0]
    assert math.isnan(s.probability[2])


def test_monotone_in_threshold(small_fleet):
    s3 = exceedance_series(small_fleet.values, 3.0)
    s4 = exceedance_series(small_fleet.values, 4.0)
    assert np.all(s4.exceed <= s3.exceed)


def test_summary_and_json(rng):
    x = random_profiles(rng, 20, 8760) * 8
    series = [exceedance_series(x, t) for t in (3.0, 4.0)]
    summaries = [coincidence_summary(s) for s in series]
    p = series[0].probability
    assert summaries[0].year_max == p.max() and summaries[0].year_max_hour == int(np.argmax(p))
    doc = json.loads(summary_json(summaries, baseline_rates(x), "EV", "base"))
    assert doc["thresholds"][1]["threshold_kwh"] == 4.0
    assert set(doc["baseline_year_average"]) == {"3", "4"}


def test_net_series_clips():
    s = exceedance_series(np.array([[5000, 100]], dtype=np.int32), 3.0)
    assert net_series(s, 0.1).tolist() == [0.9, 0.0]


def test_domain_errors():
    with pytest.raises(DomainError):
        exceedance_series(np.ones((1, 3), dtype=np.int32), 0.0)
    with pytest.raises(DomainError):
        coincidence_summary(exceedance_series(np.zeros((2, 24), dtype=np.int32), 3.0))
