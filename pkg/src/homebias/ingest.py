"""Load panel input files into a validated :class:`~homebias.domain.Panel`.

All inputs are UTF-8, comma-separated, with a mandatory lowercase header.
Numbers use a decimal point and no thousands separators. A panel directory
holds:

======================  ==================================================
``manifest.txt``        ``key = value`` lines: origin, unit, share_convention
``holdings.csv``        country, year, domestic, foreign, funds, aggregate
``positions.csv``       country, year, holdings, actual_share, optimal_share
``exchange_rates.csv``  country, year_month, value
``returns.csv``         country, year_month, value
``attributes.csv``      country, year, distance_km, common_language, ...
``classification.csv``  country, name, market_class
======================  ==================================================

Only ``manifest.txt`` and ``holdings.csv`` are required; a missing
``classification.csv`` falls back to the packaged default.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .domain import (
    ATTRIBUTE_FIELDS,
    BilateralPosition,
    CountryAttributes,
    CountryId,
    Finding,
    HoldingsRecord,
    MarketClass,
    MonthlySeries,
    Panel,
    SeriesKind,
    is_iso_code,
    validate_panel,
)
from .factors import parse_key_values

HOLDINGS_COLUMNS = ("country", "year", "domestic", "foreign", "funds", "aggregate")
POSITIONS_COLUMNS = ("country", "year", "holdings", "actual_share", "optimal_share")
SERIES_COLUMNS = ("country", "year_month", "value")
ATTRIBUTE_COLUMNS = (
    "country",
    "year",
    "distance_km",
    "common_language",
    "common_legal_origin",
    "tax_rate",
    "exports",
    "imports",
    "gdp",
    "foreign_listed",
    "total_listed",
    "market_cap",
)
CLASSIFICATION_COLUMNS = ("country", "name", "market_class")

PANEL_FILES = {
    "manifest": "manifest.txt",
    "holdings": "holdings.csv",
    "positions": "positions.csv",
    "exchange_rates": "exchange_rates.csv",
    "returns": "returns.csv",
    "attributes": "attributes.csv",
    "classification": "classification.csv",
}

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^[+-]?\d+$")
_MONTH = re.compile(r"^(\d{4})-(0[1-9]|1[0-2])$")


class SchemaError(Exception):
    def __init__(self, file: str, line: int, column: str, rule: str):
        self.file, self.line, self.column, self.rule = str(file), line, column, rule
        super().__init__(f"{self.file}:{line}: column {column!r}: {rule}")


class IngestError(Exception):
    """One or more rows were rejected; ``errors`` lists one SchemaError per row."""

    def __init__(self, errors: Sequence[SchemaError]):
        self.errors = list(errors)
        more = f" (+{len(self.errors) - 1} more)" if len(self.errors) > 1 else ""
        super().__init__(f"{self.errors[0]}{more}")


class PanelError(Exception):
    def __init__(self, message: str, findings: Sequence[Finding] = ()):
        self.findings = list(findings)
        super().__init__(message)


class _Cell(Exception):
    def __init__(self, column: str, rule: str):
        self.column, self.rule = column, rule


def _number(row: dict, column: str, required: bool = False) -> Optional[float]:
    text = row[column].strip()
    if not text:
        if required:
            raise _Cell(column, "required")
        return None
    if not _NUMBER.match(text):
        raise _Cell(column, "not a number")
    return float(text)


def _integer(row: dict, column: str, required: bool = False) -> Optional[int]:
    text = row[column].strip()
    if not text:
        if required:
            raise _Cell(column, "required")
        return None
    if not _INTEGER.match(text):
        raise _Cell(column, "not an integer")
    return int(text)


def _dummy(row: dict, column: str) -> Optional[bool]:
    text = row[column].strip()
    if not text:
        return None
    if text not in ("0", "1"):
        raise _Cell(column, "must be 0 or 1")
    return text == "1"


def _country(row: dict) -> str:
    code = row["country"].strip()
    if not is_iso_code(code):
        raise _Cell("country", "must be 3 uppercase letters")
    return code


def _nonneg(value, column):
    if value is not None and value < 0:
        raise _Cell(column, "must be >= 0")
    return value


def _read_rows(path: Path, columns: Sequence[str], optional: Sequence[str] = ()):
    """Yield ``(line_number, row_dict)``; missing optional columns read as blank."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise IngestError([SchemaError(path, 1, "", "missing header row")]) from None
    unknown = [h for h in header if h not in columns]
    if unknown:
        raise IngestError([SchemaError(path, 1, unknown[0], "unknown column")])
    missing = [c for c in columns if c not in header and c not in optional]
    if missing:
        raise IngestError([SchemaError(path, 1, missing[0], "missing column")])
    for cells in reader:
        line = reader.line_num
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != len(header):
            yield line, SchemaError(path, line, "", f"expected {len(header)} fields, got {len(cells)}")
            continue
        row = dict.fromkeys(columns, "")
        row.update(zip(header, cells))
        yield line, row


def _parse_file(path, columns, parse: Callable[[dict], object], key=None, optional=()):
    out, errors, seen = [], [], {}
    for line, row in _read_rows(path, columns, optional):
        if isinstance(row, SchemaError):
            errors.append(row)
            continue
        try:
            rec = parse(row)
        except _Cell as cell:
            errors.append(SchemaError(path, line, cell.column, cell.rule))
            continue
        if key is not None:
            k = key(rec)
            if k in seen:
                errors.append(SchemaError(path, line, "country", f"duplicate key {k} (first at line {seen[k]})"))
                continue
            seen[k] = line
        out.append(rec)
    if errors:
        raise IngestError(errors)
    return out


def load_holdings(path: str | Path) -> list[HoldingsRecord]:
    """Holdings rows; a blank ``aggregate`` is computed as domestic + foreign + funds."""

    def parse(row):
        country = _country(row)
        year = _integer(row, "year", required=True)
        domestic = _nonneg(_number(row, "domestic", required=True), "domestic")
        foreign = _nonneg(_number(row, "foreign"), "foreign")
        funds = _nonneg(_number(row, "funds"), "funds")
        aggregate = _number(row, "aggregate")
        if aggregate is None:
            if foreign is None or funds is None:
                raise _Cell("aggregate", "required unless domestic, foreign and funds are all given")
            aggregate = domestic + foreign + funds
        if not aggregate > 0:
            raise _Cell("aggregate", "must be > 0")
        return HoldingsRecord(country, year, domestic, aggregate, foreign, funds)

    rows = _parse_file(path, HOLDINGS_COLUMNS, parse, key=lambda r: r.key, optional=("aggregate",))
    return sorted(rows, key=lambda r: r.key)


def load_positions(path: str | Path) -> list[BilateralPosition]:
    def parse(row):
        return BilateralPosition(
            _country(row),
            _integer(row, "year", required=True),
            _nonneg(_number(row, "holdings"), "holdings"),
            _nonneg(_number(row, "actual_share"), "actual_share"),
            _positive(_number(row, "optimal_share"), "optimal_share"),
        )

    rows = _parse_file(path, POSITIONS_COLUMNS, parse, key=lambda r: r.key)
    return sorted(rows, key=lambda r: r.key)


def _positive(value, column):
    if value is not None and not value > 0:
        raise _Cell(column, "must be > 0")
    return value


def load_monthly_series(path: str | Path, kind: SeriesKind | str) -> list[MonthlySeries]:
    """One series per country, months ascending. Duplicate months are rejected."""
    kind = SeriesKind(kind)

    def parse(row):
        country = _country(row)
        month = row["year_month"].strip()
        if not _MONTH.match(month):
            raise _Cell("year_month", "must be YYYY-MM")
        value = _number(row, "value", required=True)
        if kind is SeriesKind.EXCHANGE_RATE and not value > 0:
            raise _Cell("value", "must be positive for ExchangeRate")
        return country, month, value

    obs = _parse_file(path, SERIES_COLUMNS, parse, key=lambda r: (r[0], r[1]))
    grouped: dict[str, list[tuple[str, float]]] = {}
    for country, month, value in obs:
        grouped.setdefault(country, []).append((month, value))
    out = []
    for country in sorted(grouped):
        pts = sorted(grouped[country])
        out.append(MonthlySeries(country, kind, tuple(m for m, _ in pts), tuple(v for _, v in pts)))
    return out


def load_attributes(path: str | Path) -> list[CountryAttributes]:
    """Attribute rows; a blank ``year`` marks a row broadcast to every panel year."""

    def parse(row):
        country = _country(row)
        year = _integer(row, "year")
        tax = _number(row, "tax_rate")
        if tax is not None and not 0 <= tax <= 1:
            raise _Cell("tax_rate", "outside [0,1]")
        foreign_listed = _nonneg(_integer(row, "foreign_listed"), "foreign_listed")
        total_listed = _positive(_integer(row, "total_listed"), "total_listed")
        if foreign_listed is not None and total_listed is not None and foreign_listed > total_listed:
            raise _Cell("foreign_listed", "foreign_listed > total_listed")
        return CountryAttributes(
            country=country,
            year=year,
            distance_km=_nonneg(_number(row, "distance_km"), "distance_km"),
            common_language=_dummy(row, "common_language"),
            common_legal_origin=_dummy(row, "common_legal_origin"),
            tax_rate=tax,
            exports=_nonneg(_number(row, "exports"), "exports"),
            imports=_nonneg(_number(row, "imports"), "imports"),
            gdp=_positive(_number(row, "gdp"), "gdp"),
            foreign_listed_firms=foreign_listed,
            total_listed_firms=total_listed,
            market_cap=_nonneg(_number(row, "market_cap"), "market_cap"),
        )

    rows = _parse_file(path, ATTRIBUTE_COLUMNS, parse, key=lambda r: r.key, optional=("year",))
    return sorted(rows, key=lambda r: (r.country, -1 if r.year is None else r.year))


def load_classification(path: Optional[str | Path] = None) -> dict[str, CountryId]:
    """Country classification; ``None`` loads the packaged default."""
    if path is None:
        ref = resources.files("homebias").joinpath("data/classification.csv")
        with resources.as_file(ref) as default:
            return load_classification(default)

    def parse(row):
        try:
            mc = MarketClass(row["market_class"].strip())
        except ValueError:
            raise _Cell("market_class", "must be Developed or Emerging") from None
        return CountryId(_country(row), mc, row["name"].strip())

    rows = _parse_file(path, CLASSIFICATION_COLUMNS, parse, key=lambda r: r.iso_code, optional=("name",))
    return {c.iso_code: c for c in sorted(rows)}


@dataclass(frozen=True)
class Manifest:
    origin: str = "USA"
    unit: str = "millions-USD"
    share_convention: str = "fraction"


def load_manifest(path: str | Path) -> Manifest:
    values = parse_key_values(Path(path).read_text(encoding="utf-8"), str(path))
    unknown = set(values) - {"origin", "unit", "share_convention"}
    if unknown:
        raise IngestError([SchemaError(path, 0, sorted(unknown)[0], "unknown manifest key")])
    m = Manifest(**values)
    if not is_iso_code(m.origin):
        raise IngestError([SchemaError(path, 0, "origin", "must be 3 uppercase letters")])
    if m.share_convention not in ("fraction", "percent"):
        raise IngestError([SchemaError(path, 0, "share_convention", "must be fraction or percent")])
    return m


def broadcast_attributes(attributes: Iterable[CountryAttributes], years: Iterable[int]) -> list[CountryAttributes]:
    """Expand year-less rows to every year; year-specific values take precedence."""
    years = sorted(set(years))
    base: dict[str, CountryAttributes] = {}
    specific: dict[tuple[str, int], CountryAttributes] = {}
    for a in attributes:
        if a.year is None:
            base[a.country] = a
        else:
            specific[(a.country, a.year)] = a
    out = {}
    for (country, year), a in specific.items():
        b = base.get(country)
        if b is not None:
            filled = {f: getattr(a, f) if getattr(a, f) is not None else getattr(b, f) for f in ATTRIBUTE_FIELDS}
            a = CountryAttributes(country, year, **filled)
        out[(country, year)] = a
    for country, b in base.items():
        for year in years:
            if (country, year) not in out:
                out[(country, year)] = CountryAttributes(country, year, **{f: getattr(b, f) for f in ATTRIBUTE_FIELDS})
    return [out[k] for k in sorted(out)]


def assemble_panel(
    holdings: Sequence[HoldingsRecord],
    series: Sequence[MonthlySeries] = (),
    attributes: Sequence[CountryAttributes] = (),
    origin: str = "USA",
    classification: Optional[dict[str, CountryId]] = None,
    positions: Sequence[BilateralPosition] = (),
    unit: str = "millions-USD",
    share_convention: str = "fraction",
) -> Panel:
    """Merge loaded inputs into a validated Panel.

    Raises :class:`PanelError` if a referenced country is unclassified or any
    error-level finding remains. Warnings are kept on ``panel.notes``.
    """
    if classification is None:
        classification = load_classification()
    referenced = {origin}
    for rows in (holdings, series, attributes, positions):
        referenced.update(r.country for r in rows)
    unclassified = sorted(referenced - set(classification))
    if unclassified:
        raise PanelError(f"countries missing from classification: {', '.join(unclassified)}")

    years = {h.year for h in holdings} | {p.year for p in positions}
    years |= {a.year for a in attributes if a.year is not None}
    panel = Panel(
        origin=origin,
        countries={c: classification[c] for c in sorted(referenced)},
        holdings=tuple(sorted(holdings, key=lambda h: h.key)),
        series=tuple(sorted(series, key=lambda s: (s.country, s.kind.value))),
        attributes=tuple(broadcast_attributes(attributes, years)),
        positions=tuple(sorted(positions, key=lambda p: p.key)),
        unit=unit,
        share_convention=share_convention,
    )
    findings = validate_panel(panel)
    errors = [f for f in findings if f.severity == "error"]
    if errors:
        more = f" (+{len(errors) - 1} more)" if len(errors) > 1 else ""
        raise PanelError(f"panel validation failed: {errors[0]}{more}", errors)

    notes = list(findings)
    if attributes:
        covered = {a.country for a in panel.attributes}
        for code in sorted({h.country for h in holdings} - covered):
            notes.append(Finding(f"attributes[{code}]", "attributes", "no attributes; excluded from regressions", "warning"))
    return replace(panel, notes=tuple(notes)) if notes else panel


def load_panel_dir(path: str | Path) -> Panel:
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"panel directory not found: {root}")
    manifest = load_manifest(root / PANEL_FILES["manifest"])
    holdings = load_holdings(root / PANEL_FILES["holdings"])

    def optional(name, loader, *args):
        p = root / PANEL_FILES[name]
        return loader(p, *args) if p.exists() else []

    series = optional("exchange_rates", load_monthly_series, SeriesKind.EXCHANGE_RATE)
    series += optional("returns", load_monthly_series, SeriesKind.MARKET_RETURN)
    cls_path = root / PANEL_FILES["classification"]
    return assemble_panel(
        holdings,
        series,
        optional("attributes", load_attributes),
        origin=manifest.origin,
        classification=load_classification(cls_path if cls_path.exists() else None),
        positions=optional("positions", load_positions),
        unit=manifest.unit,
        share_convention=manifest.share_convention,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def write_panel_dir(panel: Panel, path: str | Path) -> Path:
    """Serialize ``panel`` so that :func:`load_panel_dir` reads it back unchanged."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    (root / PANEL_FILES["manifest"]).write_text(
        f"origin = {panel.origin}\nunit = {panel.unit}\nshare_convention = {panel.share_convention}\n",
        encoding="utf-8",
    )
    _write_csv(
        root / PANEL_FILES["holdings"],
        HOLDINGS_COLUMNS,
        ((h.country, h.year, h.domestic_assets, h.foreign_assets, h.investment_funds, h.aggregate_assets) for h in panel.holdings),
    )
    if panel.positions:
        _write_csv(
            root / PANEL_FILES["positions"],
            POSITIONS_COLUMNS,
            ((p.country, p.year, p.holdings, p.actual_share, p.optimal_share) for p in panel.positions),
        )
    for name, kind in (("exchange_rates", SeriesKind.EXCHANGE_RATE), ("returns", SeriesKind.MARKET_RETURN)):
        chosen = [s for s in panel.series if s.kind is kind]
        if chosen:
            _write_csv(
                root / PANEL_FILES[name],
                SERIES_COLUMNS,
                ((s.country, m, v) for s in chosen for m, v in zip(s.months, s.values)),
            )
    if panel.attributes:
        _write_csv(
            root / PANEL_FILES["attributes"],
            ATTRIBUTE_COLUMNS,
            ((a.country, a.year, *(getattr(a, f) for f in ATTRIBUTE_FIELDS)) for a in panel.attributes),
        )
    _write_csv(
        root / PANEL_FILES["classification"],
        CLASSIFICATION_COLUMNS,
        ((c.iso_code, c.name, c.market_class.value) for c in panel.countries.values()),
    )
    return root
