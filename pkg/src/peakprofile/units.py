"""Exact kWh accounting in integer thousandths (meter resolution is 0.001 kWh)."""

from __future__ import annotations

import math

import numpy as np

MILLI = 1000
#: Household connection cap; readings above it are faulty.
CAP_KWH = 29.0
CAP_MILLI = 29_000


def kwh_to_milli(value: float) -> int:
    return int(round(value * MILLI))


def parse_milli(text: str) -> int | None:
    """Parse a decimal kWh string into thousandths, or None when unparseable.

    Extra fractional digits beyond the meter resolution are rounded.
    """
    try:
        x = float(text)
    except ValueError:
        return None
    if not math.isfinite(x):
        return None
    return int(round(x * MILLI))


def format_milli(value: int) -> str:
    sign = "-" if value < 0 else ""
    q, r = divmod(abs(int(value)), MILLI)
    return f"{sign}{q}.{r:03d}"


def milli_to_kwh(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float64) / MILLI
