"""Seeded synthetic panels with a planted bilateral-bias model.

The layout mirrors the 20-country sample (USA as origin, 11 emerging and
8 developed destinations) over nine years, so the pooled design has
171 rows, 99 emerging and 72 developed. All monetary inputs, series and
attributes are drawn from a fixed-seed generator; only the response is
planted::

    hb_bilateral = CONST + sum_k coef_k * factor_k + noise

Positions are then written as currency holdings so that the pipeline
recovers ``hb_bilateral`` from holdings and market caps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional

import numpy as np

from .domain import (
    BilateralPosition,
    CountryAttributes,
    HoldingsRecord,
    MonthlySeries,
    SeriesKind,
    DomainError,
)
from .factors import COLUMN_NAMES, FactorConfig, compute_factors
from .ingest import assemble_panel, load_classification
from .metrics import optimal_share, world_market_cap

ORIGIN = "USA"

# (distance from New York in km, common language, common legal origin, base market cap)
COUNTRY_PROFILE = {
    "AUS": (15958.0, 1, 1, 1.3e6),
    "BRA": (7680.0, 0, 0, 1.2e6),
    "CAN": (550.0, 1, 0, 2.0e6),
    "CHN": (11860.0, 0, 0, 3.7e6),
    "COL": (3990.0, 0, 0, 2.6e5),
    "DEU": (6200.0, 0, 0, 1.5e6),
    "EGY": (9020.0, 0, 0, 6.0e4),
    "ESP": (5770.0, 0, 0, 1.0e6),
    "FRA": (5840.0, 0, 0, 1.8e6),
    "GBR": (5570.0, 1, 1, 3.0e6),
    "IND": (12540.0, 1, 1, 1.3e6),
    "ITA": (6470.0, 0, 0, 5.0e5),
    "JPN": (10850.0, 0, 0, 3.7e6),
    "MEX": (3360.0, 0, 0, 5.0e5),
    "MYS": (15340.0, 0, 1, 4.7e5),
    "POL": (6860.0, 0, 0, 1.8e5),
    "THA": (13980.0, 0, 0, 3.8e5),
    "TUR": (8070.0, 0, 0, 3.0e5),
    "USA": (0.0, 1, 1, 1.87e7),
    "ZAF": (12830.0, 1, 1, 9.0e5),
}

DEFAULT_COEFFICIENTS = MappingProxyType(
    {
        "CONST": 0.55,
        "VOL": 1.5,
        "COV": 15.0,
        "SIZE": -0.4,
        "DIS": 0.02,
        "LAN": -0.05,
        "LO": -0.03,
        "TAX": 0.1,
        "TRD": -0.04,
        "FL": -0.2,
    }
)


@dataclass(frozen=True)
class SyntheticSpec:
    seed: int = 2012
    years: tuple[int, ...] = tuple(range(2005, 2014))
    coefficients: Mapping[str, float] = DEFAULT_COEFFICIENTS
    # per market class ("Emerging"/"Developed") replacements for some coefficients
    class_overrides: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    noise_sd: float = 0.0
    config: FactorConfig = FactorConfig()


def planted_coefficients(spec: SyntheticSpec, market_class: str) -> dict[str, float]:
    coefs = dict(spec.coefficients)
    coefs.update(spec.class_overrides.get(market_class, {}))
    return coefs


def _months(years):
    return tuple(f"{y:04d}-{m:02d}" for y in years for m in range(1, 13))


def _draw_inputs(spec: SyntheticSpec, rng: np.random.Generator):
    classification = load_classification()
    countries = sorted(COUNTRY_PROFILE)
    years = spec.years
    months = _months(years)
    n_months = len(months)

    # monthly market returns: destinations load on the origin factor with a
    # yearly-varying beta so COV moves across years
    us = rng.normal(0.006, 0.045, n_months)
    series = [MonthlySeries(ORIGIN, SeriesKind.MARKET_RETURN, months, tuple(map(float, us)))]
    for code in countries:
        if code == ORIGIN:
            continue
        emerging = classification[code].market_class.value == "Emerging"
        beta = np.repeat(rng.uniform(0.3, 1.4, len(years)), 12)
        idio = rng.normal(0.004, 0.06 if emerging else 0.035, n_months)
        series.append(MonthlySeries(code, SeriesKind.MARKET_RETURN, months, tuple(map(float, beta * us + idio))))

        vol = np.repeat(rng.uniform(0.01, 0.06 if emerging else 0.03, len(years)), 12)
        log_rate = np.log(rng.uniform(0.5, 20.0)) + np.cumsum(rng.normal(0.0, vol))
        series.append(MonthlySeries(code, SeriesKind.EXCHANGE_RATE, months, tuple(map(float, np.exp(log_rate)))))

    attributes = []
    for code in countries:
        km, lan, lo, cap0 = COUNTRY_PROFILE[code]
        attributes.append(
            CountryAttributes(code, None, distance_km=km, common_language=bool(lan), common_legal_origin=bool(lo))
        )
        cap = cap0
        for year in years:
            cap *= float(np.exp(rng.normal(0.04, 0.15)))
            gdp = cap * float(rng.uniform(0.8, 2.5))
            total = int(rng.integers(150, 3000))
            attributes.append(
                CountryAttributes(
                    code,
                    year,
                    tax_rate=float(rng.uniform(0.1, 0.4)),
                    exports=gdp * float(rng.uniform(0.05, 0.6)),
                    imports=gdp * float(rng.uniform(0.05, 0.6)),
                    gdp=gdp,
                    foreign_listed_firms=int(rng.integers(0, total // 4)),
                    total_listed_firms=total,
                    market_cap=cap,
                )
            )
    return classification, series, attributes


def make_synthetic_panel(spec: SyntheticSpec = SyntheticSpec()):
    """Build a synthetic :class:`~homebias.domain.Panel` from ``spec``.

    Returns ``(panel, planted)`` where ``planted`` maps (destination, year)
    to the planted bilateral home bias, noise included.
    """
    rng = np.random.default_rng(spec.seed)
    classification, series, attributes = _draw_inputs(spec, rng)
    bare = assemble_panel([], series, attributes, ORIGIN, classification)

    planted: dict[tuple[str, int], float] = {}
    shares: dict[tuple[str, int], float] = {}
    for year in spec.years:
        world = world_market_cap(bare, year, spec.config.include_origin_in_world)
        for dest in bare.destinations():
            fv, problems = compute_factors(bare, dest, year, spec.config)
            if fv is None:
                raise DomainError(f"synthetic factors incomplete for {dest} {year}: {problems}")
            coefs = planted_coefficients(spec, bare.countries[dest].market_class.value)
            hb = coefs["CONST"] + sum(coefs[name] * x for name, x in zip(COLUMN_NAMES, fv.as_array()))
            if spec.noise_sd:
                hb += float(rng.normal(0.0, spec.noise_sd))
            if not 0.0 < hb < 1.0:
                raise DomainError(f"planted bilateral bias {hb:.4f} for {dest} {year} outside (0, 1)")
            planted[(dest, year)] = hb
            opt = optimal_share(bare.attributes_for(dest, year).market_cap, world)
            shares[(dest, year)] = opt * (1.0 - hb)

    holdings, positions = [], []
    for year in spec.years:
        for code in sorted(COUNTRY_PROFILE):
            cap = bare.attributes_for(code, year).market_cap
            aggregate = cap * float(rng.uniform(0.6, 1.2))
            if code == ORIGIN:
                dest_holdings = {d: shares[(d, year)] * aggregate for d in bare.destinations()}
                foreign = sum(dest_holdings.values()) * 1.25
                for d, h in dest_holdings.items():
                    positions.append(BilateralPosition(d, year, holdings=float(h)))
            else:
                foreign = aggregate * float(rng.uniform(0.0, 0.4))
            funds = aggregate * float(rng.uniform(0.0, 0.05))
            domestic = aggregate - foreign - funds
            holdings.append(HoldingsRecord(code, year, domestic, domestic + foreign + funds, foreign, funds))

    panel = assemble_panel(holdings, series, attributes, ORIGIN, classification, positions)
    return panel, planted


def expected_counts(spec: Optional[SyntheticSpec] = None) -> dict[str, int]:
    """Rows per subsample for a fully populated synthetic layout."""
    spec = spec or SyntheticSpec()
    classification = load_classification()
    dests = [c for c in COUNTRY_PROFILE if c != ORIGIN]
    emerging = sum(classification[c].market_class.value == "Emerging" for c in dests)
    n_years = len(spec.years)
    return {
        "all": len(dests) * n_years,
        "emerging": emerging * n_years,
        "developed": (len(dests) - emerging) * n_years,
    }
