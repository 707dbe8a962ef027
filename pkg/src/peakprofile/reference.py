"""Published Danish 2017 reference values, transcribed for format checks.

These come from confidential register-linked meter data and cannot be
recomputed here. They feed report-format snapshots and sanity checks on
their own internal consistency.
"""

from __future__ import annotations

from dataclasses import dataclass

from peakprofile.taxonomy import CategoryCode

# Peak hours per month of the top-20% gross-consumption calendar.
PEAK_HOURS_BY_MONTH = (321, 283, 223, 73, 18, 2, 0, 7, 62, 209, 294, 255)
# floor(0.2 * 8760); the monthly counts above sum to 1747 instead
EXPECTED_TOP20_HOURS = 1752


@dataclass(frozen=True)
class CategoryProfile:
    code: str
    count: int
    rural: int  # percent
    urban: int
    p3: int  # percent with exactly three occupants
    p4: int
    children: tuple[int | None, int | None, int | None, int | None]  # 0, 1, 2, 3 children, percent


CATEGORY_PROFILES = (
    CategoryProfile("H_P3_A1_€3_EV0_HP0", 12088, 12, 88, 47, 53, (3, 43, 53, 1)),
    CategoryProfile("H_P3_A2_€3_EV0_HP0", 35618, 12, 88, 42, 58, (3, 39, 58, None)),
    CategoryProfile("H_P3_A3_€3_EV0_HP0", 54445, 17, 83, 37, 63, (None, 35, 61, None)),
    CategoryProfile("H_P3_A3_€3_EV1_HP0", 265, 14, 86, 32, 68, (3, 30, 67, None)),
    CategoryProfile("H_P3_A2_€3_EV0_HP1", 198, 35, 65, 44, 56, (None, None, None, None)),
    CategoryProfile("H_P3_A3_€3_EV0_HP1", 635, 44, 56, 37, 63, (None, None, None, None)),
)

# Average hourly consumption (kWh) of households without EV and heat pump,
# keyed by category code; suppressed cells are missing.
ANNUAL_HOURLY_MEANS: dict[str, float] = {}


def _fill_annual() -> None:
    rows = [
        ("P1", "Ap", 1, (0.135, 0.134, 0.132)),
        ("P1", "Ap", 2, (0.146, 0.151, 0.148)),
        ("P1", "Ap", 3, (0.173, 0.188, 0.214)),
        ("P1", "H", 1, (0.209, 0.237, 0.249)),
        ("P1", "H", 2, (0.267, 0.279, 0.302)),
        ("P1", "H", 3, (0.326, 0.334, 0.392)),
        ("P2", "Ap", 1, (0.165, 0.175, 0.165)),
        ("P2", "Ap", 2, (0.193, 0.206, 0.197)),
        ("P2", "Ap", 3, (0.238, 0.251, 0.289)),
        ("P2", "H", 1, (0.298, 0.327, 0.363)),
        ("P2", "H", 2, (0.372, 0.371, 0.397)),
        ("P2", "H", 3, (None, 0.424, 0.466)),
        ("P3", "Ap", 3, (None, None, 0.359)),
        ("P3", "H", 1, (0.386, 0.388, 0.446)),
        ("P3", "H", 2, (0.472, 0.445, 0.476)),
        ("P3", "H", 3, (0.575, 0.540, 0.550)),
        ("P5+", "H", 1, (0.499, 0.481, 0.532)),
        ("P5+", "H", 2, (0.558, 0.537, 0.540)),
        ("P5+", "H", 3, (0.733, 0.657, 0.618)),
    ]
    for occ, dw, area, values in rows:
        for income, v in enumerate(values, start=1):
            if v is not None:
                ANNUAL_HOURLY_MEANS[str(CategoryCode(dw, occ, area, income, 0, 0))] = v


_fill_annual()

# Average mean / variance (kWh, kWh^2) of 50 random picks per peak level.
PICK_AVERAGES = {
    "noHP": {"20%": (0.69, 0.43), "5%": (0.76, 0.50), "1%": (0.98, 0.65)},
    "HP": {"20%": (1.62, 1.33), "5%": (1.94, 1.53), "1%": (2.23, 1.77)},
    "noEV": {"20%": (0.69, 0.43), "5%": (0.76, 0.50), "1%": (0.98, 0.65)},
    "EV": {"20%": (1.10, 2.75), "5%": (1.19, 2.91), "1%": (1.56, 4.13)},
}
PICK_PAIRS = (("noHP", "HP"), ("noEV", "EV"), ("HP", "EV"))
# Share of the 50 Welch tests that kept the equal-means hypothesis.
ACCEPTANCE_RATES = {(a, b, lvl): 0.0 for a, b in PICK_PAIRS for lvl in ("20%", "5%", "1%")}

# Peak-window statistics of the whole-category adoption scenarios (MWh, top 20%).
ADOPTION_WINDOW = {
    "EV": {"max": 140.0, "mean": 61.0, "median": 44.0},
    "HP": {"max": 160.0, "mean": 89.0, "median": 89.0},
}
ADOPTION_BASE_COUNT = 54445


def validate() -> list[str]:
    """Internal-consistency problems of the transcribed tables (empty when clean)."""
    problems = []
    if len(PEAK_HOURS_BY_MONTH) != 12 or any(c < 0 for c in PEAK_HOURS_BY_MONTH):
        problems.append("peak hours by month must be 12 non-negative counts")
    for p in CATEGORY_PROFILES:
        CategoryCode.parse(p.code)
        if p.rural + p.urban != 100:
            problems.append(f"{p.code}: rural + urban != 100")
        if p.p3 + p.p4 != 100:
            problems.append(f"{p.code}: P3 + P4 != 100")
        if sum(c for c in p.children if c is not None) > 100:
            problems.append(f"{p.code}: children shares exceed 100")
    for code, v in ANNUAL_HOURLY_MEANS.items():
        c = CategoryCode.parse(code)
        if c.ev or c.hp:
            problems.append(f"{code}: annual table covers EV0/HP0 only")
        if not 0 < v < 29.0:
            problems.append(f"{code}: implausible hourly mean {v}")
    for group, levels in PICK_AVERAGES.items():
        for lvl, (mean, var) in levels.items():
            if mean <= 0 or var <= 0:
                problems.append(f"{group} {lvl}: non-positive mean or variance")
    if PICK_AVERAGES["noHP"] != PICK_AVERAGES["noEV"]:
        problems.append("baseline group differs between the HP and EV comparisons")
    return problems
