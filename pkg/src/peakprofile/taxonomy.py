"""Consumer categories: dwelling, occupancy, area, income, EV and heat-pump flags.

A category code reads ``<DW>_<P>_<A>_<€>_<EV>_<HP>``, e.g.
``H_P3_A3_€3_EV1_HP0``. Band upper edges are inclusive.
"""

from __future__ import annotations

import csv
import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from peakprofile.errors import FormatError

ATTRIBUTES_HEADER = ("meter_id", "dwelling", "occupants", "area_sqm", "income_dkk", "ev", "hp")
OPTIONAL_COLUMNS = ("rural", "children")

DWELLING_LABELS = {"AP": "Ap", "H": "H"}


@dataclass(frozen=True)
class HouseholdAttributes:
    meter_id: str
    dwelling: str  # "AP" or "H"
    occupants: int
    area_sqm: float
    income_dkk: float
    has_ev: bool
    has_hp: bool
    rural: bool | None = None
    children: int | None = None

    def __post_init__(self) -> None:
        if self.dwelling not in DWELLING_LABELS:
            raise ValueError(f"dwelling must be AP or H, got {self.dwelling!r}")
        if self.occupants < 1:
            raise ValueError("occupants must be >= 1")
        if not self.area_sqm > 0:
            raise ValueError("area_sqm must be positive")
        if self.income_dkk < 0:
            raise ValueError("income_dkk must be non-negative")
        if self.children is not None and self.children < 0:
            raise ValueError("children must be non-negative")


def _check_increasing(name: str, edges: Sequence[float]) -> None:
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError(f"{name} edges must be strictly increasing: {edges}")


@dataclass(frozen=True)
class CategoryScheme:
    """Band definitions. Defaults reproduce the Danish 2017 grouping."""

    house_area_edges: tuple[float, ...] = (110.0, 146.0)
    apartment_area_edges: tuple[float, ...] = (66.0, 85.0)
    income_edges: tuple[float, ...] = (240_260.0, 449_097.0)
    # (minimum occupants, label), ascending
    occupancy_bands: tuple[tuple[int, str], ...] = ((1, "P1"), (2, "P2"), (3, "P3"), (5, "P5+"))
    dwellings: tuple[str, ...] = ("AP", "H")
    ev_levels: tuple[int, ...] = (0, 1)
    hp_levels: tuple[int, ...] = (0, 1)
    exclude_ev_and_hp: bool = True
    privacy_k: int = 20

    def __post_init__(self) -> None:
        _check_increasing("house area", self.house_area_edges)
        _check_increasing("apartment area", self.apartment_area_edges)
        _check_increasing("income", self.income_edges)
        _check_increasing("occupancy", [lo for lo, _ in self.occupancy_bands])
        if not self.occupancy_bands or self.occupancy_bands[0][0] != 1:
            raise ValueError("occupancy bands must start at 1 occupant")
        if len(self.house_area_edges) != len(self.apartment_area_edges):
            raise ValueError("house and apartment area band counts differ")
        if self.privacy_k < 1:
            raise ValueError("privacy_k must be >= 1")

    @property
    def n_area_bands(self) -> int:
        return len(self.house_area_edges) + 1

    @property
    def n_income_bands(self) -> int:
        return len(self.income_edges) + 1


def _band(value: float, edges: Sequence[float]) -> int:
    """1-based band index with inclusive upper edges."""
    for i, edge in enumerate(edges):
        if value <= edge:
            return i + 1
    return len(edges) + 1


@dataclass(frozen=True, order=True)
class CategoryCode:
    dwelling: str  # "Ap" or "H"
    occupancy: str  # "P1", "P2", "P3", "P5+"
    area: int
    income: int
    ev: int
    hp: int

    def __str__(self) -> str:
        return f"{self.dwelling}_{self.occupancy}_A{self.area}_€{self.income}_EV{self.ev}_HP{self.hp}"

    @classmethod
    def parse(cls, text: str) -> CategoryCode:
        """Parse a canonical code. The letter ``O`` is accepted for a zero flag."""
        parts = text.strip().split("_")
        if len(parts) != 6:
            raise ValueError(f"category code needs 6 parts: {text!r}")
        dw, occ, area, inc, ev, hp = parts
        if dw not in ("Ap", "H"):
            raise ValueError(f"bad dwelling in {text!r}")
        if not occ.startswith("P") or len(occ) < 2:
            raise ValueError(f"bad occupancy in {text!r}")
        try:
            if not area.startswith("A") or not inc.startswith("€"):
                raise ValueError
            a, i = int(area[1:]), int(inc[1:])
            e = int(ev[2:].replace("O", "0")) if ev.startswith("EV") else None
            h = int(hp[2:].replace("O", "0")) if hp.startswith("HP") else None
        except ValueError:
            raise ValueError(f"bad category code {text!r}") from None
        if e not in (0, 1) or h not in (0, 1):
            raise ValueError(f"bad EV/HP flag in {text!r}")
        return cls(dw, occ, a, i, e, h)

    @property
    def slug(self) -> str:
        """Filesystem-friendly form (ASCII only)."""
        return str(self).replace("€", "inc").replace("+", "plus")

    def with_flags(self, ev: int | None = None, hp: int | None = None) -> CategoryCode:
        return CategoryCode(
            self.dwelling,
            self.occupancy,
            self.area,
            self.income,
            self.ev if ev is None else ev,
            self.hp if hp is None else hp,
        )


class _Excluded:
    """Sentinel for households outside every category (EV and HP together)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Excluded"


Excluded = _Excluded()


def occupancy_label(occupants: int, scheme: CategoryScheme) -> str:
    label = scheme.occupancy_bands[0][1]
    for lo, name in scheme.occupancy_bands:
        if occupants >= lo:
            label = name
    return label


def assign_category(attrs: HouseholdAttributes, scheme: CategoryScheme = CategoryScheme()) -> CategoryCode | _Excluded:
    if scheme.exclude_ev_and_hp and attrs.has_ev and attrs.has_hp:
        return Excluded
    edges = scheme.house_area_edges if attrs.dwelling == "H" else scheme.apartment_area_edges
    return CategoryCode(
        DWELLING_LABELS[attrs.dwelling],
        occupancy_label(attrs.occupants, scheme),
        _band(attrs.area_sqm, edges),
        _band(attrs.income_dkk, scheme.income_edges),
        int(attrs.has_ev),
        int(attrs.has_hp),
    )


def enumerate_codes(scheme: CategoryScheme = CategoryScheme()) -> list[CategoryCode]:
    """Every admissible code of the scheme, sorted by canonical string."""
    grid = itertools.product(
        [DWELLING_LABELS[d] for d in scheme.dwellings],
        [name for _, name in scheme.occupancy_bands],
        range(1, scheme.n_area_bands + 1),
        range(1, scheme.n_income_bands + 1),
        scheme.ev_levels,
        scheme.hp_levels,
    )
    codes = [
        CategoryCode(*combo)
        for combo in grid
        if not (scheme.exclude_ev_and_hp and combo[4] and combo[5])
    ]
    return sorted(codes, key=str)


@dataclass
class CategoryEntry:
    members: list[str]
    shares: dict[str, float] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.members)


@dataclass
class CategoryTable:
    entries: dict[CategoryCode, CategoryEntry]
    excluded: list[str] = field(default_factory=list)
    suppressed: list[str] = field(default_factory=list)

    def __contains__(self, code: CategoryCode) -> bool:
        return code in self.entries

    def __getitem__(self, code: CategoryCode) -> CategoryEntry:
        return self.entries[code]

    def codes(self) -> list[CategoryCode]:
        return sorted(self.entries, key=str)

    def counts(self) -> dict[CategoryCode, int]:
        return {c: e.count for c, e in self.entries.items()}

    @property
    def total(self) -> int:
        return sum(e.count for e in self.entries.values()) + len(self.excluded) + len(self.suppressed)

    def to_dict(self) -> dict:
        return {
            "categories": {
                str(c): {"count": self.entries[c].count, "shares": self.entries[c].shares}
                for c in self.codes()
            },
            "excluded": len(self.excluded),
            "suppressed": len(self.suppressed),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def _shares(members: Sequence[HouseholdAttributes]) -> dict[str, float]:
    n = len(members)
    shares: dict[str, float] = {}
    rural = [a.rural for a in members if a.rural is not None]
    if rural:
        shares["rural"] = sum(rural) / len(rural)
        shares["urban"] = 1 - shares["rural"]
    occ = Counter(a.occupants for a in members)
    if len(occ) > 1:
        for k in sorted(occ):
            shares[f"occupants_{k}"] = occ[k] / n
    kids = Counter(min(a.children, 3) for a in members if a.children is not None)
    if kids:
        total = sum(kids.values())
        for k in sorted(kids):
            shares[f"children_{k}{'+' if k == 3 else ''}"] = kids[k] / total
    return shares


def build_category_table(
    attrs: Iterable[HouseholdAttributes], scheme: CategoryScheme = CategoryScheme()
) -> CategoryTable:
    groups: dict[CategoryCode, list[HouseholdAttributes]] = {}
    excluded: list[str] = []
    seen: set[str] = set()
    for a in attrs:
        if a.meter_id in seen:
            raise FormatError(f"duplicate meter_id {a.meter_id!r} in attributes")
        seen.add(a.meter_id)
        code = assign_category(a, scheme)
        if code is Excluded:
            excluded.append(a.meter_id)
        else:
            groups.setdefault(code, []).append(a)
    entries = {
        code: CategoryEntry([a.meter_id for a in members], _shares(members))
        for code, members in groups.items()
    }
    return CategoryTable(entries, excluded)


def apply_privacy_filter(table: CategoryTable, k: int) -> CategoryTable:
    """Drop categories with fewer than ``k`` members; their households become suppressed."""
    if k < 1:
        raise ValueError("k must be >= 1")
    kept = {c: e for c, e in table.entries.items() if e.count >= k}
    dropped = [m for c, e in table.entries.items() if e.count < k for m in e.members]
    return CategoryTable(kept, list(table.excluded), list(table.suppressed) + sorted(dropped))


def _flag(value: str, name: str, source: str, line: int) -> bool:
    if value not in ("0", "1"):
        raise FormatError(f"{name} must be 0 or 1, got {value!r}", source, line)
    return value == "1"


def parse_attributes(lines: Iterable[str], source: str = "<attributes>") -> list[HouseholdAttributes]:
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None:
        raise FormatError("empty attributes file", source, 1)
    header = [h.strip() for h in header]
    if tuple(header[:7]) != ATTRIBUTES_HEADER or any(h not in OPTIONAL_COLUMNS for h in header[7:]):
        raise FormatError("invalid attributes header", source, 1)
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != len(header):
            raise FormatError(f"expected {len(header)} fields, got {len(row)}", source, lineno)
        rec = dict(zip(header, (c.strip() for c in row)))
        try:
            attrs = HouseholdAttributes(
                meter_id=rec["meter_id"],
                dwelling=rec["dwelling"],
                occupants=int(rec["occupants"]),
                area_sqm=float(rec["area_sqm"]),
                income_dkk=float(rec["income_dkk"]),
                has_ev=_flag(rec["ev"], "ev", source, lineno),
                has_hp=_flag(rec["hp"], "hp", source, lineno),
                rural=_flag(rec["rural"], "rural", source, lineno) if rec.get("rural") else None,
                children=int(rec["children"]) if rec.get("children") else None,
            )
        except FormatError:
            raise
        except ValueError as exc:
            raise FormatError(str(exc), source, lineno) from None
        out.append(attrs)
    return out


def read_attributes(path: str | Path) -> list[HouseholdAttributes]:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        return parse_attributes(fh, source=path.name)


def _num(x: float) -> str:
    return f"{x:.0f}" if float(x).is_integer() else f"{x:.2f}"


def write_attributes(path: str | Path, attrs: Sequence[HouseholdAttributes]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(ATTRIBUTES_HEADER + OPTIONAL_COLUMNS) + "\n")
        for a in attrs:
            fields = [
                a.meter_id,
                a.dwelling,
                str(a.occupants),
                _num(a.area_sqm),
                _num(a.income_dkk),
                str(int(a.has_ev)),
                str(int(a.has_hp)),
                "" if a.rural is None else str(int(a.rural)),
                "" if a.children is None else str(a.children),
            ]
            fh.write(",".join(fields) + "\n")
