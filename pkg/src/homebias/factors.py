"""Determinant factors of bilateral home bias and the regression design matrix.

Nine regressors per (destination, year)::

    VOL   std of monthly exchange-rate changes over the window
    COV   covariance of origin and destination monthly market returns
    SIZE  destination share of world market capitalization
    DIS   distance from the origin (log km by default)
    LAN   common language / colonial background dummy
    LO    common legal origin dummy
    TAX   destination tax rate
    TRD   0.5 * (exports + imports) / GDP
    FL    foreign listed firms / total listed firms

Rows with any missing input are dropped and listed in the exclusion report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .domain import (
    DomainError,
    InsufficientDataError,
    MonthlySeries,
    Panel,
    SeriesKind,
    Subsample,
    month_index,
)
from .metrics import bilateral_home_bias, resolve_shares, world_market_cap

COLUMN_NAMES = ("VOL", "COV", "SIZE", "DIS", "LAN", "LO", "TAX", "TRD", "FL")


class EmptyDesignError(DomainError):
    pass


@dataclass(frozen=True)
class FactorConfig:
    change_mode: str = "simple"
    distance_mode: str = "log"
    window_years: int = 1
    include_origin_in_world: bool = True
    se_type: str = "classical"

    def __post_init__(self):
        if self.change_mode not in ("simple", "log"):
            raise ValueError(f"change_mode must be simple or log, got {self.change_mode!r}")
        if self.distance_mode not in ("log", "raw"):
            raise ValueError(f"distance_mode must be log or raw, got {self.distance_mode!r}")
        if self.window_years < 1:
            raise ValueError("window_years must be >= 1")
        if self.se_type not in ("classical", "hc1"):
            raise ValueError(f"se_type must be classical or hc1, got {self.se_type!r}")

    def header(self) -> str:
        return (
            f"change_mode={self.change_mode} distance_mode={self.distance_mode} "
            f"window_years={self.window_years} include_origin_in_world={str(self.include_origin_in_world).lower()} "
            f"se_type={self.se_type}"
        )


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes"):
        return True
    if low in ("0", "false", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_key_values(text: str, source: str = "<config>") -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{n}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def load_factor_config(path: str | Path, base: Optional[FactorConfig] = None) -> FactorConfig:
    values = parse_key_values(Path(path).read_text(encoding="utf-8"), str(path))
    known = {f.name: f for f in fields(FactorConfig)}
    updates = {}
    for key, value in values.items():
        if key not in known:
            raise ValueError(f"{path}: unknown factor config key {key!r}")
        if key == "window_years":
            updates[key] = int(value)
        elif key == "include_origin_in_world":
            updates[key] = _parse_bool(value)
        else:
            updates[key] = value
    return replace(base or FactorConfig(), **updates)


def _adjacent_changes(series: MonthlySeries, mode: str) -> np.ndarray:
    idx = [month_index(m) for m in series.months]
    vals = series.values
    out = []
    for i in range(1, len(vals)):
        # a change across a missing month would span two periods; skip it
        if idx[i] - idx[i - 1] != 1:
            continue
        if mode == "log":
            out.append(math.log(vals[i] / vals[i - 1]))
        else:
            out.append((vals[i] - vals[i - 1]) / vals[i - 1])
    return np.asarray(out, dtype=float)


def fx_volatility(rates: MonthlySeries, window: tuple[int, int], change_mode: str = "simple") -> float:
    """Sample std (ddof=1) of month-over-month exchange-rate changes inside ``window``."""
    inside = rates.window(*window)
    if len(inside) < 3:
        raise InsufficientDataError(
            f"{rates.country}: {len(inside)} monthly exchange-rate observations in "
            f"{window[0]}-{window[1]}, need at least 3"
        )
    if any(v <= 0 for v in inside.values):
        raise DomainError(f"{rates.country}: exchange rates must be positive")
    changes = _adjacent_changes(inside, change_mode)
    if changes.size < 2:
        raise InsufficientDataError(
            f"{rates.country}: only {changes.size} consecutive-month changes in {window[0]}-{window[1]}"
        )
    return float(np.std(changes, ddof=1))


def return_covariance(
    origin_returns: MonthlySeries,
    dest_returns: MonthlySeries,
    window: tuple[int, int],
) -> float:
    """Sample covariance (ddof=1) over the months both series share."""
    a = origin_returns.window(*window)
    b = dest_returns.window(*window)
    lookup = dict(zip(b.months, b.values))
    pairs = [(x, lookup[m]) for m, x in zip(a.months, a.values) if m in lookup]
    if len(pairs) < 3:
        raise InsufficientDataError(
            f"{origin_returns.country}/{dest_returns.country}: overlap of {len(pairs)} months "
            f"in {window[0]}-{window[1]}, need at least 3"
        )
    x, y = np.asarray(pairs, dtype=float).T
    return float(np.dot(x - x.mean(), y - y.mean()) / (len(x) - 1))


def market_size_share(dest_cap: float, world_cap: float) -> float:
    if not (world_cap > 0):
        raise DomainError(f"world market cap must be > 0, got {world_cap!r}")
    if not (0 <= dest_cap <= world_cap):
        raise DomainError(f"market cap {dest_cap!r} outside [0, world cap {world_cap!r}]")
    return dest_cap / world_cap


def trade_openness(exports: float, imports: float, gdp: float) -> float:
    if not (gdp > 0):
        raise DomainError(f"GDP must be > 0, got {gdp!r}")
    if exports < 0 or imports < 0:
        raise DomainError("exports and imports must be >= 0")
    return 0.5 * (exports + imports) / gdp


def distance_feature(km: float, mode: str = "log") -> float:
    if not (km > 0):
        raise DomainError(f"distance must be > 0 km, got {km!r}")
    if mode == "log":
        return math.log(km)
    if mode == "raw":
        return float(km)
    raise ValueError(f"unknown distance mode {mode!r}")


@dataclass(frozen=True)
class FactorVector:
    vol: float
    cov: float
    size: float
    dis: float
    lan: int
    lo: int
    tax: float
    trd: float
    fl: float

    def as_array(self) -> np.ndarray:
        return np.array([self.vol, self.cov, self.size, self.dis, self.lan, self.lo, self.tax, self.trd, self.fl])


@dataclass(frozen=True)
class Exclusion:
    country: str
    year: int
    reason: str

    def __str__(self) -> str:
        return f"{self.country} {self.year}: {self.reason}"


@dataclass
class DesignMatrix:
    rows: list[tuple[str, int, FactorVector]]
    response: np.ndarray
    column_names: tuple[str, ...] = COLUMN_NAMES
    exclusions: list[Exclusion] = field(default_factory=list)
    subsample: Subsample = Subsample.ALL
    years: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def X(self) -> np.ndarray:
        if not self.rows:
            return np.empty((0, len(self.column_names)))
        return np.vstack([fv.as_array() for _, _, fv in self.rows])


def compute_factors(
    panel: Panel,
    destination: str,
    year: int,
    config: FactorConfig = FactorConfig(),
) -> tuple[Optional[FactorVector], list[str]]:
    """Factor vector for one destination-year, or ``None`` with the reasons it is missing."""
    problems = []
    window = (year - config.window_years + 1, year)
    attrs = panel.attributes_for(destination, year)
    if attrs is None:
        return None, ["no attributes"]

    vol = cov = size = dis = trd = fl = None
    rates = panel.get_series(destination, SeriesKind.EXCHANGE_RATE)
    if rates is None:
        problems.append("no exchange-rate series")
    else:
        try:
            vol = fx_volatility(rates, window, config.change_mode)
        except DomainError as exc:
            problems.append(f"VOL: {exc}")

    r_origin = panel.get_series(panel.origin, SeriesKind.MARKET_RETURN)
    r_dest = panel.get_series(destination, SeriesKind.MARKET_RETURN)
    if r_origin is None or r_dest is None:
        problems.append("no market-return series for origin or destination")
    else:
        try:
            cov = return_covariance(r_origin, r_dest, window)
        except DomainError as exc:
            problems.append(f"COV: {exc}")

    world = world_market_cap(panel, year, config.include_origin_in_world)
    if attrs.market_cap is None or world is None:
        problems.append("missing market_cap (destination or world)")
    else:
        size = market_size_share(attrs.market_cap, world)

    if attrs.distance_km is None:
        problems.append("missing distance_km")
    else:
        dis = distance_feature(attrs.distance_km, config.distance_mode)

    for name in ("common_language", "common_legal_origin", "tax_rate"):
        if getattr(attrs, name) is None:
            problems.append(f"missing {name}")

    if attrs.exports is None or attrs.imports is None or attrs.gdp is None:
        problems.append("missing exports, imports or gdp")
    else:
        trd = trade_openness(attrs.exports, attrs.imports, attrs.gdp)

    if attrs.foreign_listed_firms is None or attrs.total_listed_firms is None:
        problems.append("missing listed-firm counts")
    else:
        fl = attrs.foreign_listed_firms / attrs.total_listed_firms

    if problems:
        return None, problems
    return (
        FactorVector(
            vol=vol,
            cov=cov,
            size=size,
            dis=dis,
            lan=int(attrs.common_language),
            lo=int(attrs.common_legal_origin),
            tax=attrs.tax_rate,
            trd=trd,
            fl=fl,
        ),
        [],
    )


def build_design_matrix(
    panel: Panel,
    years: Iterable[int],
    subsample: Subsample = Subsample.ALL,
    config: FactorConfig = FactorConfig(),
) -> DesignMatrix:
    """Stack one row per (destination, year) with bilateral bias as the response."""
    years = tuple(sorted(set(years)))
    rows, response, excluded = [], [], []
    for year in years:
        for dest in panel.destinations():
            if not subsample.admits(panel.countries[dest].market_class):
                continue
            actual, optimal, share_problems = resolve_shares(panel, dest, year, config.include_origin_in_world)
            fv, problems = compute_factors(panel, dest, year, config)
            problems = share_problems + problems
            if not problems and not optimal > 0:
                problems = ["benchmark weight undefined"]
            if problems:
                excluded.append(Exclusion(dest, year, "; ".join(problems)))
                continue
            rows.append((dest, year, fv))
            response.append(bilateral_home_bias(actual, optimal).hb_bilateral)
    if not rows:
        raise EmptyDesignError(
            f"no usable rows for subsample {subsample.value} in years {list(years)}"
            + (f" (first exclusion: {excluded[0]})" if excluded else "")
        )
    return DesignMatrix(
        rows=rows,
        response=np.asarray(response, dtype=float),
        exclusions=excluded,
        subsample=subsample,
        years=years,
    )
