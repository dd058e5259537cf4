from __future__ import annotations

import math

import pytest
from hypothesis import given, settings, strategies as st

from homebias.domain import (
    BilateralPosition,
    CountryAttributes,
    CountryId,
    DomainError,
    HoldingsRecord,
    MarketClass,
    Panel,
)
from homebias.ingest import load_classification
from homebias.metrics import (
    actual_foreign_share,
    bilateral_home_bias,
    bilateral_table,
    hb_table,
    home_bias,
    optimal_share,
    world_market_cap,
)
from reference_tables import MULTIYEAR_HB, MULTIYEAR_YEARS, BILATERAL_2012, HB_2012

pos = st.floats(1e-6, 1e6, allow_nan=False, allow_infinity=False)


def test_australia():
    assert home_bias(HoldingsRecord("AUS", 2012, 636089.8, 672388.5)).hb == pytest.approx(0.946015287, abs=1e-9)


def test_usa():
    assert home_bias(HoldingsRecord("USA", 2012, 25113766.3, 28553196.4)).hb == pytest.approx(0.879543079, abs=1e-9)


def test_columbia_fully_domestic():
    assert home_bias(HoldingsRecord("COL", 2012, 9418.9, 9418.9)).hb == 1.0


@pytest.mark.parametrize("agg", [0.0, -1.0])
def test_nonpositive_aggregate_names_record(agg):
    with pytest.raises(DomainError, match=r"holdings\[AUS,2012\]"):
        home_bias(HoldingsRecord("AUS", 2012, 1.0, agg))


@pytest.mark.parametrize("code", sorted(set(HB_2012) - {"THA"}))
def test_published_2012_rows_within_1e9(code):
    agg, dom, hb = HB_2012[code]
    assert abs(home_bias(HoldingsRecord(code, 2012, dom, agg)).hb - hb) < 1e-9


def test_actual_foreign_share():
    assert actual_foreign_share(0.0, 123.0) == 0.0
    assert actual_foreign_share(50.0, 200.0) == 0.25
    share = actual_foreign_share(116.0, 1000.0)
    assert share == pytest.approx(0.116, abs=1e-15)
    assert share * 1000.0 == pytest.approx(116.0, rel=1e-15)
    with pytest.raises(DomainError):
        actual_foreign_share(1.0, 0.0)


def test_optimal_share():
    w = 7.3e7
    assert optimal_share(0.0, w) == 0.0
    assert optimal_share(w, w) == 1.0
    assert optimal_share(0.350 * w, w) == pytest.approx(0.350, abs=1e-15)
    with pytest.raises(DomainError):
        optimal_share(w * 1.01, w)
    with pytest.raises(DomainError):
        optimal_share(1.0, 0.0)


def test_bilateral_examples():
    assert bilateral_home_bias(0.0187, 0.71738).hb_bilateral == pytest.approx(0.97393, abs=5e-5)
    assert bilateral_home_bias(0.0477, 0.3459).hb_bilateral == pytest.approx(0.86209, abs=5e-5)
    can = bilateral_home_bias(0.1160, 0.350)
    assert can.share_ratio == pytest.approx(0.33143, abs=5e-6)
    assert can.hb_bilateral == pytest.approx(0.66857, abs=5e-6)
    assert bilateral_home_bias(0.42, 0.42).hb_bilateral == 0.0


def test_bilateral_zero_benchmark():
    with pytest.raises(DomainError, match="benchmark weight undefined"):
        bilateral_home_bias(0.1, 0.0)


def test_negative_bias_not_clamped():
    r = bilateral_home_bias(0.5, 0.25)
    assert r.hb_bilateral == -1.0


@settings(max_examples=200)
@given(pos, pos, pos, st.floats(1e-6, 1e6))
def test_home_bias_scale_invariant(dom, foreign, funds, c):
    h = HoldingsRecord("AUS", 2012, dom, dom + foreign + funds, foreign, funds)
    hc = HoldingsRecord("AUS", 2012, dom * c, (dom + foreign + funds) * c, foreign * c, funds * c)
    assert abs(home_bias(h).hb - home_bias(hc).hb) <= 1e-12
    assert 0.0 <= home_bias(h).hb <= 1.0


@settings(max_examples=200)
@given(st.floats(0.0, 1e3), pos)
def test_bilateral_unit_invariant(a, o):
    frac = bilateral_home_bias(a, o).hb_bilateral
    pct = bilateral_home_bias(100 * a, 100 * o).hb_bilateral
    assert abs(frac - pct) <= 1e-12 * max(1.0, abs(frac))
    assert frac <= 1.0
    assert bilateral_home_bias(a, o).hb_bilateral == 1.0 - a / o


@settings(max_examples=200)
@given(st.floats(1e-4, 10.0), st.floats(1e-3, 10.0), st.floats(1e-3, 1.0))
def test_bilateral_monotone(a, o, d):
    # a bounded away from 0 so 1 - a/o stays distinguishable from 1 in floating point
    base = bilateral_home_bias(a, o).hb_bilateral
    assert bilateral_home_bias(a + d, o).hb_bilateral < base
    assert bilateral_home_bias(a, o + d).hb_bilateral > base


@pytest.mark.parametrize("code", sorted(BILATERAL_2012))
def test_bilateral_2012_recompute_from_columns(code):
    real, opt, ratio, hb = BILATERAL_2012[code]
    r = bilateral_home_bias(real, opt)
    if code == "GBR":
        # the printed HB_ij (0.7977) disagrees with its own ratio column; the multi-year table gives 0.76775
        assert r.hb_bilateral == pytest.approx(1 - ratio, abs=5e-5)
    else:
        assert abs(r.hb_bilateral - hb) < 5e-4


def _panel(holdings=(), attributes=(), positions=()):
    cls = load_classification()
    refs = {"USA"} | {r.country for r in (*holdings, *attributes, *positions)}
    return Panel("USA", {c: cls[c] for c in refs}, tuple(holdings), (), tuple(attributes), tuple(positions))


def test_hb_table_sorted_and_reports_missing(table_2012_panel):
    rows, findings = hb_table(table_2012_panel, 2012)
    assert [r.country for r in rows] == sorted(HB_2012)
    assert findings == []


def test_hb_table_single_country():
    rows, findings = hb_table(_panel([HoldingsRecord("COL", 2012, 9418.9, 9418.9)]), 2012)
    assert [(r.country, r.hb) for r in rows] == [("COL", 1.0)]
    # the origin is classified but has no holdings
    assert [f.record for f in findings] == ["holdings[USA,2012]"]


def test_hb_table_empty_year(table_2012_panel):
    rows, findings = hb_table(table_2012_panel, 1990)
    assert rows == []
    assert len(findings) == 1 and findings[0].severity == "warning"


def test_hb_table_multiyear_2013_roundtrip():
    # holdings built so that domestic/aggregate equals each published 2013 value
    year = MULTIYEAR_YEARS.index(2013)
    holdings = []
    for i, (code, vals) in enumerate(sorted(MULTIYEAR_HB.items())):
        agg = 1000.0 + 137.0 * i
        holdings.append(HoldingsRecord(code, 2013, vals[year] * agg, agg))
    rows, _ = hb_table(_panel(holdings), 2013)
    got = {r.country: r.hb for r in rows}
    for code, vals in MULTIYEAR_HB.items():
        assert got[code] == pytest.approx(vals[year], abs=1e-12)


def test_bilateral_table_at_benchmark():
    positions = [BilateralPosition(c, 2012, actual_share=0.2, optimal_share=0.2) for c in ("AUS", "BRA", "CAN")]
    rows, findings = bilateral_table(_panel(positions=positions), 2012)
    assert [r.hb_bilateral for r in rows] == [0.0, 0.0, 0.0]
    assert findings == []


def test_bilateral_table_missing_share_named():
    positions = [BilateralPosition("AUS", 2012, actual_share=0.02, optimal_share=0.7),
                 BilateralPosition("BRA", 2012, actual_share=0.05)]
    rows, findings = bilateral_table(_panel(positions=positions), 2012)
    assert [r.destination for r in rows] == ["AUS"]
    assert [f.record for f in findings] == ["positions[BRA,2012]"]
    assert "optimal" in findings[0].rule


def test_bilateral_from_holdings_and_caps():
    caps = {"USA": 600.0, "AUS": 300.0, "BRA": 100.0}
    attrs = [CountryAttributes(c, 2012, market_cap=v) for c, v in caps.items()]
    holdings = [HoldingsRecord("USA", 2012, 900.0, 1000.0, 100.0, 0.0)]
    positions = [BilateralPosition("AUS", 2012, holdings=60.0), BilateralPosition("BRA", 2012, holdings=40.0)]
    panel = _panel(holdings, attrs, positions)
    rows, _ = bilateral_table(panel, 2012)
    got = {r.destination: r for r in rows}
    assert got["AUS"].optimal_share == pytest.approx(0.3)
    assert got["AUS"].actual_share == pytest.approx(0.06)
    assert got["AUS"].hb_bilateral == pytest.approx(0.8)
    assert got["BRA"].hb_bilateral == pytest.approx(0.6)
    # leaving the origin out of the world portfolio raises every optimal share
    rows_ex, _ = bilateral_table(panel, 2012, include_origin_in_world=False)
    assert rows_ex[0].optimal_share == pytest.approx(0.75)
    assert world_market_cap(panel, 2012) == 1000.0


def test_percent_convention_same_hb():
    frac = _panel(positions=[BilateralPosition("AUS", 2012, actual_share=0.0187, optimal_share=0.71738)])
    pct = Panel(frac.origin, frac.countries, positions=(BilateralPosition("AUS", 2012, actual_share=1.87,
                                                                          optimal_share=71.738),),
                share_convention="percent")
    a = bilateral_table(frac, 2012)[0][0]
    b = bilateral_table(pct, 2012)[0][0]
    assert math.isclose(a.hb_bilateral, b.hb_bilateral, abs_tol=1e-12)
    assert b.actual_share == pytest.approx(0.0187)


def test_classification_default():
    cls = load_classification()
    assert cls["AUS"].market_class is MarketClass.DEVELOPED
    assert cls["EGY"].market_class is MarketClass.EMERGING
    assert isinstance(cls["USA"], CountryId)
