"""Render tables and regression reports as text, CSV, or JSON lines.

Text output uses fixed precision per table family: 9 decimals for global
home bias, 5 for bilateral tables. Regression rows read
``coefficient (t-stat)`` with an explicit p-value column instead of
significance stars. CSV and JSON lines carry full float precision.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Mapping, Optional, Sequence

from .domain import CountryId
from .factors import COLUMN_NAMES, DesignMatrix
from .metrics import BilateralBiasResult, HomeBiasResult
from .ols import RegressionReport

FORMATS = ("text", "csv", "jsonl")
EXTENSIONS = {"text": "txt", "csv": "csv", "jsonl": "jsonl"}


def _name(code: str, countries: Optional[Mapping[str, CountryId]]) -> str:
    if countries and code in countries:
        return countries[code].label
    return code


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def _grid(header: Sequence[str], rows: Sequence[Sequence[str]], right: Sequence[bool]) -> str:
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(header)]

    def line(cells):
        out = [c.rjust(w) if r else c.ljust(w) for c, w, r in zip(cells, widths, right)]
        return "  ".join(out).rstrip()

    return "\n".join([line(header)] + [line(r) for r in rows]) + "\n"


def render_hb(
    tables: Mapping[int, Sequence[HomeBiasResult]],
    fmt: str = "text",
    countries: Optional[Mapping[str, CountryId]] = None,
) -> str:
    if fmt == "csv":
        return _csv(
            ("country", "year", "aggregate_assets", "domestic_assets", "hb"),
            ((r.country, r.year, repr(r.aggregate_assets), repr(r.domestic_assets), repr(r.hb))
             for y in sorted(tables) for r in tables[y]),
        )
    if fmt == "jsonl":
        return _jsonl(
            {"country": r.country, "year": r.year, "aggregate_assets": r.aggregate_assets,
             "domestic_assets": r.domestic_assets, "hb": r.hb}
            for y in sorted(tables) for r in tables[y]
        )
    blocks = []
    for year in sorted(tables):
        rows = [
            [_name(r.country, countries), f"{r.aggregate_assets:.1f}", f"{r.domestic_assets:.1f}", f"{r.hb:.9f}"]
            for r in tables[year]
        ]
        blocks.append(
            f"Home bias in share portfolios ({year})\n"
            + _grid(("Country", "Aggregate assets", "Aggregate domestic assets", "HB"), rows, (False, True, True, True))
        )
    return "\n".join(blocks)


def render_bilateral(
    tables: Mapping[int, Sequence[BilateralBiasResult]],
    fmt: str = "text",
    countries: Optional[Mapping[str, CountryId]] = None,
) -> str:
    if fmt == "csv":
        return _csv(
            ("country", "year", "actual_share", "optimal_share", "share_ratio", "hb_bilateral"),
            ((r.destination, r.year, repr(r.actual_share), repr(r.optimal_share), repr(r.share_ratio),
              repr(r.hb_bilateral)) for y in sorted(tables) for r in tables[y]),
        )
    if fmt == "jsonl":
        return _jsonl(
            {"country": r.destination, "year": r.year, "actual_share": r.actual_share,
             "optimal_share": r.optimal_share, "share_ratio": r.share_ratio, "hb_bilateral": r.hb_bilateral}
            for y in sorted(tables) for r in tables[y]
        )
    blocks = []
    for year in sorted(tables):
        rows = [
            [_name(r.destination, countries), f"{r.actual_share:.5f}", f"{r.optimal_share:.5f}",
             f"{r.share_ratio:.5f}", f"{r.hb_bilateral:.5f}"]
            for r in tables[year]
        ]
        blocks.append(
            f"Bilateral bias in the share portfolio ({year})\n"
            + _grid(("Country", "Real portion", "Optimal portion", "ratio", "HB_ij"), rows,
                    (False, True, True, True, True))
        )
    return "\n".join(blocks)


def render_factors(designs: Sequence[DesignMatrix], fmt: str = "text") -> str:
    header = ("country", "year") + tuple(c.lower() for c in COLUMN_NAMES) + ("hb_bilateral",)
    records = [
        (dest, year, *fv.as_array().tolist(), float(y))
        for d in designs
        for (dest, year, fv), y in zip(d.rows, d.response)
    ]
    if fmt == "csv":
        return _csv(header, ((r[0], r[1], *map(repr, r[2:])) for r in records))
    if fmt == "jsonl":
        return _jsonl(dict(zip(header, r)) for r in records)
    rows = [[r[0], str(r[1]), *(f"{v:.6g}" for v in r[2:])] for r in records]
    text_header = ("country", "year") + COLUMN_NAMES + ("hb_bilateral",)
    return _grid(text_header, rows, (False,) + (True,) * (len(header) - 1))


def _coef(value: float) -> str:
    return f"{value:.4g}"


def _tstat(value: Optional[float]) -> str:
    return "(undef)" if value is None else f"({value:.2f})"


def regression_title(report: RegressionReport) -> str:
    return f"Results of regression of the basic econometric model: {report.subsample.value} ({report.label})"


def render_regression(reports: Sequence[RegressionReport], fmt: str = "text") -> str:
    if fmt == "csv":
        return _csv(
            ("subsample", "label", "variable", "coefficient", "std_error", "t_stat", "p_value", "r_squared", "n_obs"),
            ((r.subsample.value, r.label, row.name, repr(row.coefficient), repr(row.std_error),
              "" if row.t_stat is None else repr(row.t_stat), "" if row.p_value is None else repr(row.p_value),
              repr(r.r_squared), r.n_obs) for r in reports for row in r.rows),
        )
    if fmt == "jsonl":
        return _jsonl(
            {"subsample": r.subsample.value, "label": r.label, "r_squared": r.r_squared, "n_obs": r.n_obs,
             "se_type": r.se_type, "config": r.config_header,
             "rows": [{"variable": row.name, "coefficient": row.coefficient, "std_error": row.std_error,
                       "t_stat": row.t_stat, "p_value": row.p_value} for row in r.rows]}
            for r in reports
        )
    blocks = []
    for r in reports:
        rows = [
            [row.name, _coef(row.coefficient), _tstat(row.t_stat),
             "undef" if row.p_value is None else f"{row.p_value:.4f}"]
            for row in r.rows
        ]
        body = _grid(("variables", "Coefficient", "Statistic-t", "p-value"), rows, (False, True, True, True))
        blocks.append(
            f"{regression_title(r)}\n{r.config_header}\n{body}\n"
            f"R²={r.r_squared:.4f}. Number of observation: {r.n_obs}\n"
        )
    return "\n".join(blocks)


def render_exclusions(reports: Sequence[RegressionReport]) -> str:
    lines = []
    for r in reports:
        lines.append(f"{r.subsample.value} ({r.label}): {len(r.exclusions)} excluded")
        lines.extend(f"  {e}" for e in r.exclusions)
    return "\n".join(lines) + "\n"


def plot_rows(
    hb_tables: Mapping[int, Sequence[HomeBiasResult]],
    bilateral_tables: Mapping[int, Sequence[BilateralBiasResult]],
    design: Optional[DesignMatrix] = None,
) -> list[tuple[str, int, str, float]]:
    """Long-format ``(country, year, metric, value)`` rows, sorted."""
    out = []
    for rows in hb_tables.values():
        out.extend((r.country, r.year, "hb", r.hb) for r in rows)
    for rows in bilateral_tables.values():
        for r in rows:
            out.append((r.destination, r.year, "actual_share", r.actual_share))
            out.append((r.destination, r.year, "optimal_share", r.optimal_share))
            out.append((r.destination, r.year, "hb_bilateral", r.hb_bilateral))
    if design is not None:
        for dest, year, fv in design.rows:
            out.extend((dest, year, name, float(v)) for name, v in zip(COLUMN_NAMES, fv.as_array()))
    return sorted(out)


def render_plot(rows: Sequence[tuple[str, int, str, float]]) -> str:
    return _csv(("country", "year", "metric", "value"), ((c, y, m, repr(v)) for c, y, m, v in rows))
