"""Global and bilateral home-bias measures.

Global home bias of a country is the domestic share of its aggregate equity
holdings. Bilateral home bias of the origin investor towards a destination
compares the destination's actual weight in the origin portfolio with its
market-capitalization (ICAPM) weight::

    hb_bilateral = 1 - actual_share / optimal_share

Zero means the holding sits exactly at the benchmark, one means nothing is
held, and negative values mean over-weighting. Negative values are reported
as computed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .domain import (
    BilateralPosition,
    DomainError,
    Finding,
    HoldingsRecord,
    Panel,
)


@dataclass(frozen=True)
class HomeBiasResult:
    country: str
    year: int
    hb: float
    aggregate_assets: float
    domestic_assets: float


@dataclass(frozen=True)
class BilateralBiasResult:
    destination: str
    year: int
    actual_share: float
    optimal_share: float
    share_ratio: float
    hb_bilateral: float


def home_bias(record: HoldingsRecord) -> HomeBiasResult:
    if not (record.aggregate_assets > 0):
        raise DomainError(
            f"holdings[{record.country},{record.year}]: aggregate_assets must be > 0, "
            f"got {record.aggregate_assets!r}"
        )
    return HomeBiasResult(
        country=record.country,
        year=record.year,
        hb=record.domestic_assets / record.aggregate_assets,
        aggregate_assets=record.aggregate_assets,
        domestic_assets=record.domestic_assets,
    )


def actual_foreign_share(foreign_holdings_in_dest: float, aggregate_equity_holdings: float) -> float:
    """Weight of one destination in the investor's total equity portfolio.

    The denominator is the investor's aggregate equity holdings (domestic,
    foreign and funds together).
    """
    if not (aggregate_equity_holdings > 0):
        raise DomainError(f"aggregate equity holdings must be > 0, got {aggregate_equity_holdings!r}")
    if foreign_holdings_in_dest < 0:
        raise DomainError(f"foreign holdings must be >= 0, got {foreign_holdings_in_dest!r}")
    return foreign_holdings_in_dest / aggregate_equity_holdings


def optimal_share(dest_market_cap: float, world_market_cap: float) -> float:
    """Value weight of the destination in the world market portfolio."""
    if not (world_market_cap > 0):
        raise DomainError(f"world market cap must be > 0, got {world_market_cap!r}")
    if not (0 <= dest_market_cap <= world_market_cap):
        raise DomainError(
            f"destination market cap {dest_market_cap!r} outside [0, world cap {world_market_cap!r}]"
        )
    return dest_market_cap / world_market_cap


def bilateral_home_bias(
    actual_share: float,
    optimal_share: float,
    destination: str = "",
    year: int = 0,
) -> BilateralBiasResult:
    """``1 - actual/optimal``; both shares only need to share a unit convention."""
    if optimal_share == 0:
        raise DomainError("benchmark weight undefined: optimal share is 0")
    if optimal_share < 0:
        raise DomainError(f"optimal share must be > 0, got {optimal_share!r}")
    if actual_share < 0:
        raise DomainError(f"actual share must be >= 0, got {actual_share!r}")
    ratio = actual_share / optimal_share
    return BilateralBiasResult(
        destination=destination,
        year=year,
        actual_share=actual_share,
        optimal_share=optimal_share,
        share_ratio=ratio,
        hb_bilateral=1.0 - ratio,
    )


def hb_table(panel: Panel, year: int) -> tuple[list[HomeBiasResult], list[Finding]]:
    """Global home bias for every country with holdings in ``year``.

    Countries in the panel without holdings that year are skipped and
    reported as warning findings.
    """
    held = panel.holdings_in(year)
    findings = []
    if not held:
        findings.append(Finding(f"year[{year}]", "holdings", "no holdings for this year", "warning"))
        return [], findings
    for code in sorted(set(panel.countries) - set(held)):
        findings.append(Finding(f"holdings[{code},{year}]", "holdings", "no holdings record", "warning"))
    return [home_bias(held[c]) for c in sorted(held)], findings


def world_market_cap(panel: Panel, year: int, include_origin: bool = True) -> Optional[float]:
    """Sum of market caps over the panel's countries, or ``None`` if any is missing."""
    attrs = panel.attributes_in(year)
    total = 0.0
    members = [c for c in sorted(panel.countries) if include_origin or c != panel.origin]
    for code in members:
        a = attrs.get(code)
        if a is None or a.market_cap is None:
            return None
        total += a.market_cap
    return total if total > 0 else None


def _share_scale(panel: Panel) -> float:
    return 100.0 if panel.share_convention == "percent" else 1.0


def resolve_shares(
    panel: Panel,
    destination: str,
    year: int,
    include_origin_in_world: bool = True,
) -> tuple[Optional[float], Optional[float], list[str]]:
    """Actual and optimal share for one destination-year, plus reasons for any gap.

    Explicit shares in the positions file take precedence. Otherwise the
    actual share comes from currency holdings over the origin's aggregate
    holdings, and the optimal share from market caps.
    """
    pos: Optional[BilateralPosition] = panel.positions_in(year).get(destination)
    scale = _share_scale(panel)
    problems = []

    actual = None
    if pos is not None and pos.actual_share is not None:
        actual = pos.actual_share / scale
    elif pos is not None and pos.holdings is not None:
        origin_rec = panel.holdings_in(year).get(panel.origin)
        if origin_rec is None:
            problems.append(f"no holdings record for origin {panel.origin}")
        else:
            actual = actual_foreign_share(pos.holdings, origin_rec.aggregate_assets)
    else:
        problems.append("missing actual share")

    optimal = None
    if pos is not None and pos.optimal_share is not None:
        optimal = pos.optimal_share / scale
    else:
        a = panel.attributes_for(destination, year)
        world = world_market_cap(panel, year, include_origin_in_world)
        if a is None or a.market_cap is None or world is None:
            problems.append("missing optimal share")
        else:
            optimal = optimal_share(a.market_cap, world)
    return actual, optimal, problems


def bilateral_table(
    panel: Panel,
    year: int,
    include_origin_in_world: bool = True,
) -> tuple[list[BilateralBiasResult], list[Finding]]:
    if not panel.positions_in(year):
        return [], [Finding(f"year[{year}]", "positions", "no bilateral data for this year", "warning")]
    rows, findings = [], []
    for dest in panel.destinations():
        actual, optimal, problems = resolve_shares(panel, dest, year, include_origin_in_world)
        if problems:
            for p in problems:
                findings.append(Finding(f"positions[{dest},{year}]", "share", p, "warning"))
            continue
        if optimal == 0:
            findings.append(
                Finding(f"positions[{dest},{year}]", "optimal_share", "benchmark weight undefined", "warning")
            )
            continue
        rows.append(bilateral_home_bias(actual, optimal, dest, year))
    return rows, findings
