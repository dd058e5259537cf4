"""``homebias`` command-line entry point.

Exit status: 0 success, 1 domain error, 2 schema/validation error,
3 usage error. Data goes to stdout or ``--out``; diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import shutil
import sys
import tempfile
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .domain import DomainError, Finding, Panel, Subsample
from .factors import FactorConfig, build_design_matrix, load_factor_config
from .ingest import IngestError, PanelError, load_panel_dir
from .metrics import bilateral_table, hb_table
from .ols import estimate_model
from . import report

EXIT_OK, EXIT_DOMAIN, EXIT_SCHEMA, EXIT_USAGE = 0, 1, 2, 3
COMMANDS = ("hb", "bilateral", "factors", "estimate", "report-all")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="homebias", description="Equity home bias tables and determinant regressions.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--panel", help="panel directory (HOMEBIAS_DATA overrides)")
    when = p.add_mutually_exclusive_group()
    when.add_argument("--year", type=int)
    when.add_argument("--years", help="inclusive range A:B")
    p.add_argument("--subsample", action="append", choices=[s.value for s in Subsample])
    p.add_argument("--format", default="text", choices=report.FORMATS)
    p.add_argument("--out", help="output directory")
    p.add_argument("--distance-mode", choices=("log", "raw"))
    p.add_argument("--change-mode", choices=("simple", "log"))
    p.add_argument("--factor-config", help="key = value factor config file")
    p.add_argument("--se-type", choices=("classical", "hc1"))
    p.add_argument("--world-excludes-origin", action="store_true",
                   help="leave the origin's market cap out of the world portfolio")
    p.add_argument("--pooled", action="store_true", help="estimate: pool all years into one regression")
    return p


def parse_years(args, panel: Panel) -> list[int]:
    if args.year is not None:
        return [args.year]
    if args.years:
        try:
            a, b = (int(x) for x in args.years.split(":"))
        except ValueError:
            raise UsageError(f"--years must look like A:B, got {args.years!r}") from None
        if a > b:
            raise UsageError(f"--years range is empty: {args.years}")
        return list(range(a, b + 1))
    years = panel.years()
    if not years:
        raise UsageError("panel has no years; pass --year or --years")
    return years


def factor_config(args) -> FactorConfig:
    try:
        cfg = load_factor_config(args.factor_config) if args.factor_config else FactorConfig()
    except (OSError, ValueError) as exc:
        raise UsageError(f"bad factor config: {exc}") from None
    updates = {}
    if args.distance_mode:
        updates["distance_mode"] = args.distance_mode
    if args.change_mode:
        updates["change_mode"] = args.change_mode
    if args.se_type:
        updates["se_type"] = args.se_type
    if args.world_excludes_origin:
        updates["include_origin_in_world"] = False
    return replace(cfg, **updates)


def _warn(findings: Sequence[Finding]):
    for f in findings:
        print(f"homebias: {f}", file=sys.stderr)


def _subsamples(args) -> list[Subsample]:
    chosen = args.subsample or ["all"]
    return [Subsample(s) for s in dict.fromkeys(chosen)]


def _hb_tables(panel, years):
    tables = {}
    for year in years:
        rows, findings = hb_table(panel, year)
        _warn(findings)
        tables[year] = rows
    return tables


def _bilateral_tables(panel, years, cfg):
    tables = {}
    for year in years:
        rows, findings = bilateral_table(panel, year, cfg.include_origin_in_world)
        _warn(findings)
        tables[year] = rows
    return tables


def _estimate(panel, years, subsamples, cfg, pooled):
    reports = []
    groups = [years] if pooled else [[y] for y in years]
    for group in groups:
        for sub in subsamples:
            try:
                reports.append(estimate_model(panel, group, sub, cfg))
            except DomainError as exc:
                raise DomainError(f"subsample {sub.value}, years {group[0]}-{group[-1]}: {exc}") from exc
    return reports


def run_command(args, panel: Panel) -> str:
    years = parse_years(args, panel)
    cfg = factor_config(args)
    fmt = args.format
    if args.command == "hb":
        return report.render_hb(_hb_tables(panel, years), fmt, panel.countries)
    if args.command == "bilateral":
        return report.render_bilateral(_bilateral_tables(panel, years, cfg), fmt, panel.countries)
    if args.command == "factors":
        designs = []
        for sub in _subsamples(args):
            d = build_design_matrix(panel, years, sub, cfg)
            for e in d.exclusions:
                print(f"homebias: excluded {sub.value}: {e}", file=sys.stderr)
            designs.append(d)
        return report.render_factors(designs, fmt)
    if args.command == "estimate":
        reports = _estimate(panel, years, _subsamples(args), cfg, args.pooled)
        for r in reports:
            for e in r.exclusions:
                print(f"homebias: excluded {r.subsample.value} {r.label}: {e}", file=sys.stderr)
        return report.render_regression(reports, fmt)
    raise UsageError(f"unknown command {args.command}")


def report_all(panel: Panel, years: Sequence[int], cfg: FactorConfig, fmt: str) -> dict[str, str]:
    """Every artifact of a full run, keyed by file name."""
    ext = report.EXTENSIONS[fmt]
    hb_tables = _hb_tables(panel, years)
    bi_tables = _bilateral_tables(panel, years, cfg)
    files = {
        f"hb.{ext}": report.render_hb(hb_tables, fmt, panel.countries),
        f"bilateral.{ext}": report.render_bilateral(bi_tables, fmt, panel.countries),
    }
    design = None
    if panel.attributes or panel.series:
        reports = _estimate(panel, list(years), list(Subsample), cfg, pooled=True)
        for r in reports:
            files[f"regression_{r.subsample.value}.{ext}"] = report.render_regression([r], fmt)
        files["exclusions.txt"] = report.render_exclusions(reports)
        design = build_design_matrix(panel, years, Subsample.ALL, cfg)
    else:
        print("homebias: panel has no factor inputs; regressions skipped", file=sys.stderr)
        files["exclusions.txt"] = "regressions skipped: panel has no attributes or series\n"
    files["plot_data.csv"] = report.render_plot(report.plot_rows(hb_tables, bi_tables, design))
    digests = "".join(
        f"{hashlib.sha256(files[name].encode('utf-8')).hexdigest()}  {name}\n" for name in sorted(files)
    )
    files["MANIFEST.sha256"] = digests
    return files


def write_tree(files: dict[str, str], out: Path):
    """Write ``files`` into ``out`` atomically: either the full tree appears or nothing."""
    out = out.resolve()
    parent = out.parent
    parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=parent))
    try:
        for name in sorted(files):
            (tmp / name).write_text(files[name], encoding="utf-8")
        if out.exists():
            shutil.rmtree(out)
        tmp.rename(out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def _check_writable(out: Optional[str]):
    if out is None:
        return
    target = Path(out).resolve()
    probe = target if target.exists() else target.parent
    while not probe.exists():
        probe = probe.parent
    if not os.access(probe, os.W_OK):
        raise UsageError(f"output directory not writable: {out}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    panel_dir = os.environ.get("HOMEBIAS_DATA") or args.panel
    try:
        if not panel_dir:
            raise UsageError("no panel: pass --panel DIR or set HOMEBIAS_DATA")
        if not Path(panel_dir).is_dir():
            raise UsageError(f"panel directory not found: {panel_dir}")
        if args.command == "report-all" and not args.out:
            raise UsageError("report-all requires --out DIR")
        _check_writable(args.out)
        panel = load_panel_dir(panel_dir)
        _warn(panel.notes)
        if args.command == "report-all":
            files = report_all(panel, parse_years(args, panel), factor_config(args), args.format)
            write_tree(files, Path(args.out))
            return EXIT_OK
        text = run_command(args, panel)
        if args.out:
            name = f"{args.command}.{report.EXTENSIONS[args.format]}"
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / name).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except UsageError as exc:
        print(f"homebias: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IngestError, PanelError) as exc:
        print(f"homebias: schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except FileNotFoundError as exc:
        print(f"homebias: schema error: missing input file: {exc.filename or exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (DomainError, ValueError) as exc:
        print(f"homebias: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
