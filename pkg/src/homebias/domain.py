"""Core value types shared across the package, and panel validation.

Monetary amounts are plain floats in a single unit declared by the panel
manifest (millions of USD by convention). Records are frozen dataclasses;
constructing one never raises for bad values. Use :func:`validate_panel`
to get the list of broken invariants.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, Optional

IDENTITY_RTOL = 1e-9

_ISO_RE = re.compile(r"^[A-Z]{3}$")


class MarketClass(str, Enum):
    DEVELOPED = "Developed"
    EMERGING = "Emerging"


class SeriesKind(str, Enum):
    EXCHANGE_RATE = "ExchangeRate"
    MARKET_RETURN = "MarketReturn"


class Subsample(str, Enum):
    ALL = "all"
    EMERGING = "emerging"
    DEVELOPED = "developed"

    def admits(self, market_class: MarketClass) -> bool:
        if self is Subsample.ALL:
            return True
        return market_class.value.lower() == self.value


class DomainError(ValueError):
    """An input outside the domain of a measure (zero denominators and the like)."""


class InsufficientDataError(DomainError):
    pass


def is_iso_code(code: str) -> bool:
    return bool(_ISO_RE.match(code))


@dataclass(frozen=True, order=True)
class CountryId:
    iso_code: str
    market_class: MarketClass
    name: str = field(default="", compare=False)

    @property
    def label(self) -> str:
        return self.name or self.iso_code


@dataclass(frozen=True)
class HoldingsRecord:
    """Aggregate equity holdings of one country in one year.

    ``foreign_assets`` and ``investment_funds`` may be unknown (``None``) when
    only the domestic/aggregate pair is published.
    """

    country: str
    year: int
    domestic_assets: float
    aggregate_assets: float
    foreign_assets: Optional[float] = None
    investment_funds: Optional[float] = None

    @property
    def key(self) -> tuple[str, int]:
        return (self.country, self.year)


@dataclass(frozen=True)
class MonthlySeries:
    """A monthly series; ``months`` are ``YYYY-MM`` strings aligned with ``values``."""

    country: str
    kind: SeriesKind
    months: tuple[str, ...]
    values: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.months)

    def window(self, first_year: int, last_year: int) -> "MonthlySeries":
        lo, hi = f"{first_year:04d}-01", f"{last_year:04d}-12"
        keep = [i for i, m in enumerate(self.months) if lo <= m <= hi]
        return MonthlySeries(
            self.country,
            self.kind,
            tuple(self.months[i] for i in keep),
            tuple(self.values[i] for i in keep),
        )


def month_index(month: str) -> int:
    """Months since year 0, so adjacent calendar months differ by one."""
    year, mon = month.split("-")
    return int(year) * 12 + int(mon) - 1


@dataclass(frozen=True)
class CountryAttributes:
    """Country-level inputs for the determinant factors.

    ``year`` is ``None`` for a row meant to apply to every panel year. Any
    field may be ``None`` (missing); rows with missing inputs are dropped
    at design-matrix time rather than imputed.
    """

    country: str
    year: Optional[int] = None
    distance_km: Optional[float] = None
    common_language: Optional[bool] = None
    common_legal_origin: Optional[bool] = None
    tax_rate: Optional[float] = None
    exports: Optional[float] = None
    imports: Optional[float] = None
    gdp: Optional[float] = None
    foreign_listed_firms: Optional[int] = None
    total_listed_firms: Optional[int] = None
    market_cap: Optional[float] = None

    @property
    def key(self) -> tuple[str, Optional[int]]:
        return (self.country, self.year)


ATTRIBUTE_FIELDS = (
    "distance_km",
    "common_language",
    "common_legal_origin",
    "tax_rate",
    "exports",
    "imports",
    "gdp",
    "foreign_listed_firms",
    "total_listed_firms",
    "market_cap",
)


@dataclass(frozen=True)
class BilateralPosition:
    """The origin investor's position in one destination for one year.

    Either the currency ``holdings`` or a precomputed ``actual_share`` may be
    given; ``optimal_share`` overrides the market-cap benchmark when present.
    Shares are in the panel's declared share convention.
    """

    country: str
    year: int
    holdings: Optional[float] = None
    actual_share: Optional[float] = None
    optimal_share: Optional[float] = None

    @property
    def key(self) -> tuple[str, int]:
        return (self.country, self.year)


@dataclass(frozen=True)
class Finding:
    record: str
    field: str
    rule: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"[{self.severity}] {self.record}: {self.field}: {self.rule}"


@dataclass(frozen=True)
class Panel:
    """Everything needed to measure home bias and fit the determinant model.

    ``attributes`` holds one row per (country, year) after broadcasting;
    ``countries`` maps ISO codes to their classification.
    """

    origin: str
    countries: Mapping[str, CountryId]
    holdings: tuple[HoldingsRecord, ...] = ()
    series: tuple[MonthlySeries, ...] = ()
    attributes: tuple[CountryAttributes, ...] = ()
    positions: tuple[BilateralPosition, ...] = ()
    unit: str = "millions-USD"
    share_convention: str = "fraction"
    notes: tuple[Finding, ...] = field(default=(), compare=False)

    def years(self) -> list[int]:
        ys = {h.year for h in self.holdings}
        ys.update(p.year for p in self.positions)
        ys.update(a.year for a in self.attributes if a.year is not None)
        return sorted(ys)

    @cached_property
    def _attr_index(self) -> dict[tuple[str, Optional[int]], CountryAttributes]:
        return {a.key: a for a in self.attributes}

    @cached_property
    def _series_index(self) -> dict[tuple[str, SeriesKind], MonthlySeries]:
        return {(s.country, s.kind): s for s in self.series}

    def holdings_in(self, year: int) -> dict[str, HoldingsRecord]:
        return {h.country: h for h in self.holdings if h.year == year}

    def attributes_for(self, country: str, year: int) -> Optional[CountryAttributes]:
        return self._attr_index.get((country, year))

    def attributes_in(self, year: int) -> dict[str, CountryAttributes]:
        return {a.country: a for a in self.attributes if a.year == year}

    def positions_in(self, year: int) -> dict[str, BilateralPosition]:
        return {p.country: p for p in self.positions if p.year == year}

    def get_series(self, country: str, kind: SeriesKind) -> Optional[MonthlySeries]:
        return self._series_index.get((country, kind))

    def destinations(self) -> list[str]:
        return sorted(c for c in self.countries if c != self.origin)

    def referenced_countries(self) -> set[str]:
        refs = {self.origin}
        for rows in (self.holdings, self.series, self.attributes, self.positions):
            refs.update(r.country for r in rows)
        return refs


def _label(kind: str, country: str, year: object = None, extra: str = "") -> str:
    out = f"{kind}[{country}"
    if year is not None:
        out += f",{year}"
    return out + (f",{extra}" if extra else "") + "]"


def _holdings_findings(h: HoldingsRecord) -> list[Finding]:
    rec = _label("holdings", h.country, h.year)
    found = []
    if not (h.aggregate_assets > 0):
        found.append(Finding(rec, "aggregate_assets", "must be > 0"))
    for name in ("domestic_assets", "foreign_assets", "investment_funds"):
        value = getattr(h, name)
        if value is not None and not (value >= 0):
            found.append(Finding(rec, name, "must be >= 0"))
    if found:
        return found
    # relational rules only on records whose individual fields are sane,
    # so a single broken value yields a single finding
    if h.domestic_assets > h.aggregate_assets:
        return [Finding(rec, "domestic_assets", "domestic_assets <= aggregate_assets")]
    if h.foreign_assets is not None and h.investment_funds is not None:
        total = h.domestic_assets + h.foreign_assets + h.investment_funds
        if not math.isclose(total, h.aggregate_assets, rel_tol=IDENTITY_RTOL):
            return [
                Finding(
                    rec,
                    "aggregate_assets",
                    "aggregate = domestic + foreign + funds "
                    f"(got {h.aggregate_assets!r}, sum {total!r})",
                )
            ]
    return []


def _series_findings(s: MonthlySeries) -> list[Finding]:
    found = []
    rec = _label("series", s.country, extra=s.kind.value)
    if len(s.months) != len(s.values):
        return [Finding(rec, "observations", "months and values differ in length")]
    for prev, cur in zip(s.months, s.months[1:]):
        if cur <= prev:
            found.append(Finding(rec, "year_month", f"strictly increasing months ({prev} then {cur})"))
    if s.kind is SeriesKind.EXCHANGE_RATE:
        for m, v in zip(s.months, s.values):
            if not (v > 0):
                found.append(Finding(rec, "value", f"exchange rate must be > 0 at {m}"))
    return found


def _attribute_findings(a: CountryAttributes, origin: str) -> list[Finding]:
    rec = _label("attributes", a.country, a.year)
    found = []
    if a.distance_km is not None:
        if a.country != origin and not (a.distance_km > 0):
            found.append(Finding(rec, "distance_km", "must be > 0 for a destination"))
        elif not (a.distance_km >= 0):
            found.append(Finding(rec, "distance_km", "must be >= 0"))
    if a.tax_rate is not None and not (0 <= a.tax_rate <= 1):
        found.append(Finding(rec, "tax_rate", "must lie in [0, 1]"))
    for name in ("exports", "imports", "market_cap", "foreign_listed_firms"):
        value = getattr(a, name)
        if value is not None and not (value >= 0):
            found.append(Finding(rec, name, "must be >= 0"))
    for name in ("gdp", "total_listed_firms"):
        value = getattr(a, name)
        if value is not None and not (value > 0):
            found.append(Finding(rec, name, "must be > 0"))
    if found:
        return found
    if (
        a.foreign_listed_firms is not None
        and a.total_listed_firms is not None
        and a.foreign_listed_firms > a.total_listed_firms
    ):
        found.append(Finding(rec, "foreign_listed_firms", "foreign_listed <= total_listed"))
    return found


def _position_findings(p: BilateralPosition) -> list[Finding]:
    rec = _label("positions", p.country, p.year)
    found = []
    for name in ("holdings", "actual_share"):
        value = getattr(p, name)
        if value is not None and not (value >= 0):
            found.append(Finding(rec, name, "must be >= 0"))
    if p.optimal_share is not None and not (p.optimal_share > 0):
        found.append(Finding(rec, "optimal_share", "must be > 0"))
    return found


def _duplicates(keys: Iterable[tuple], kind: str) -> list[Finding]:
    found = []
    for key, count in sorted(Counter(keys).items(), key=lambda kv: repr(kv[0])):
        for _ in range(count - 1):
            found.append(Finding(_label(kind, *key), "key", "duplicate (country, year)"))
    return found


def validate_panel(panel: Panel) -> list[Finding]:
    """Return every broken invariant of ``panel``; empty means valid.

    The result is sorted, so it does not depend on record order.
    """
    found: list[Finding] = []
    if not is_iso_code(panel.origin):
        found.append(Finding("panel", "origin", "3 uppercase letters"))
    for code, cid in panel.countries.items():
        if not is_iso_code(code) or cid.iso_code != code:
            found.append(Finding(_label("country", code), "iso_code", "3 uppercase letters"))
    for code in sorted(panel.referenced_countries() - set(panel.countries)):
        found.append(Finding(_label("country", code), "market_class", "country must be classified"))

    found += _duplicates((h.key for h in panel.holdings), "holdings")
    found += _duplicates((a.key for a in panel.attributes), "attributes")
    found += _duplicates((p.key for p in panel.positions), "positions")
    found += _duplicates(((s.country, s.kind.value) for s in panel.series), "series")

    for h in panel.holdings:
        found += _holdings_findings(h)
    for s in panel.series:
        found += _series_findings(s)
    for a in panel.attributes:
        found += _attribute_findings(a, panel.origin)
    for p in panel.positions:
        found += _position_findings(p)
    return sorted(found, key=lambda f: (f.record, f.field, f.rule, f.severity))
