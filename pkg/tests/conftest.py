from __future__ import annotations

import sys
from dataclasses import replace

import numpy as np
import pytest

from peakprofile.synth import SynthConfig, generate_fleet

SMALL_COUNTS = {
    "H_P3_A3_€3_EV0_HP0": 60,
    "H_P3_A3_€3_EV1_HP0": 30,
    "H_P3_A3_€3_EV0_HP1": 30,
    "Ap_P1_A1_€1_EV0_HP0": 25,
}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_cfg() -> SynthConfig:
    return replace(SynthConfig(seed=3), counts=SMALL_COUNTS)


@pytest.fixture(scope="session")
def small_fleet(small_cfg):
    return generate_fleet(small_cfg)


def random_profiles(rng: np.random.Generator, n: int, hours: int, gap_rate: float = 0.02) -> np.ndarray:
    """Lognormal thousandths with a sprinkling of gaps (zeros)."""
    x = np.rint(rng.lognormal(-0.9, 0.8, size=(n, hours)) * 1000).clip(1, 29_000).astype(np.int32)
    x[rng.random((n, hours)) < gap_rate] = 0
    return x


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
