"""Primary acceptance criteria, one test each.

Every test records a PASS/FAIL line (printed in the terminal summary) and
then asserts, so a criterion that cannot be met shows up as a failure with
the measured numbers rather than being loosened.
"""

from __future__ import annotations

import hashlib
import re
import time
from pathlib import Path

import numpy as np
import pytest

from homebias.cli import main
from homebias.domain import HoldingsRecord, Subsample
from homebias.factors import COLUMN_NAMES, build_design_matrix
from homebias.ingest import load_panel_dir
from homebias.metrics import bilateral_home_bias, bilateral_table, hb_table, home_bias
from homebias.ols import estimate_model, fit_arrays, inference, normal_equations_arrays
from homebias.report import render_regression
from homebias.synthetic import SyntheticSpec, make_synthetic_panel, planted_coefficients
from conftest import ACCEPTANCE, DATA, ROOT
from reference_tables import MULTIYEAR_BILATERAL, MULTIYEAR_YEARS, BILATERAL_2012, HB_2012


def record(name: str, ok: bool, detail: str):
    ACCEPTANCE[name] = (bool(ok), detail)
    assert ok, f"{name}: {detail}"


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_global_hb_2012_golden(table_2012_panel):
    (rows, _), elapsed = _timed(lambda: hb_table(table_2012_panel, 2012))
    got = {r.country: r.hb for r in rows}
    # also through the bare operation, straight from the published columns
    direct = {c: home_bias(HoldingsRecord(c, 2012, dom, agg)).hb for c, (agg, dom, _) in HB_2012.items()}
    diffs = {c: abs(got[c] - hb) for c, (_, _, hb) in HB_2012.items()}
    bad = {c: d for c, d in diffs.items() if not d < 1e-6}
    ok = len(got) == 20 and not bad and got == direct and elapsed < 1.0
    detail = f"{20 - len(bad)}/20 rows within 1e-6 in {elapsed:.3f}s"
    if bad:
        detail += "; off: " + ", ".join(f"{c} by {d:.3g}" for c, d in sorted(bad.items()))
    record("Global HB 2012 golden (1e-6)", ok, detail)


def test_bilateral_hb_2012_golden(table_2012_panel):
    (rows, _), elapsed = _timed(lambda: bilateral_table(table_2012_panel, 2012))
    got = {r.destination: r.hb_bilateral for r in rows}
    diffs = {c: abs(got[c] - v[3]) for c, v in BILATERAL_2012.items()}
    bad = {c: d for c, d in diffs.items() if not d < 5e-4}
    ok = len(got) == 19 and not bad and elapsed < 1.0
    detail = f"{19 - len(bad)}/19 rows within 5e-4 in {elapsed:.3f}s"
    if bad:
        detail += "; off: " + ", ".join(f"{c} by {d:.3g}" for c, d in sorted(bad.items()))
    record("Bilateral HB 2012 golden (5e-4)", ok, detail)


def test_multiyear_bilateral_recomputation():
    col = MULTIYEAR_YEARS.index(2012)
    cells = {c: vals[col] for c, vals in MULTIYEAR_BILATERAL.items() if vals[col] is not None}
    diffs = {}
    for c, published in cells.items():
        real, opt, _, _ = BILATERAL_2012[c]
        diffs[c] = abs(bilateral_home_bias(real, opt).hb_bilateral - published)
    bad = {c: d for c, d in diffs.items() if not d < 5e-4}

    # other years: published cells satisfy the range bound, and shares that
    # reproduce each cell give the same value in percent units
    others = [v for vals in MULTIYEAR_BILATERAL.values() for i, v in enumerate(vals) if i != col and v is not None]
    in_range = all(-np.inf < v <= 1 for v in others)
    unit_ok = True
    for i, v in enumerate(others):
        opt = 0.05 + 0.01 * i
        act = (1 - v) * opt
        frac = bilateral_home_bias(act, opt).hb_bilateral
        pct = bilateral_home_bias(100 * act, 100 * opt).hb_bilateral
        unit_ok &= abs(frac - pct) <= 1e-12 and abs(frac - v) <= 1e-12
    ok = len(cells) == 19 and not bad and in_range and unit_ok
    detail = (f"{len(cells) - len(bad)}/{len(cells)} 2012 cells within 5e-4 (max {max(diffs.values()):.2g}); "
              f"{len(others)} other cells in range={in_range}, unit-invariant={unit_ok}")
    record("Multi-year bilateral recomputation (5e-4)", ok, detail)


def _random_instance(rng):
    while True:
        n = int(rng.integers(20, 501))
        p = int(rng.integers(2, 11))
        k = p - 1
        mix = np.eye(k)
        if rng.random() < 0.5:
            mix = mix + rng.uniform(-0.9, 0.9, (k, k))
        scales = 10.0 ** rng.uniform(-2, 2, k)
        X = (rng.normal(size=(n, k)) @ mix) * scales + rng.normal(0, 1, k) * scales
        Xf = np.column_stack([np.ones(n), X])
        cond = np.linalg.cond(Xf)
        if cond < 1e6:
            break
    beta = rng.choice([-1.0, 1.0], p) * rng.uniform(0.5, 2.0, p)
    beta[1:] /= scales
    y = Xf @ beta + rng.normal(0, rng.uniform(0.01, 1.0), n)
    return X, y, cond


def test_ols_oracle_suite():
    rng = np.random.default_rng(20121)
    t0 = time.perf_counter()
    worst_rel = worst_orth = max_cond = 0.0
    for _ in range(1000):
        X, y, cond = _random_instance(rng)
        a = fit_arrays(X, y)
        b = normal_equations_arrays(X, y)
        worst_rel = max(worst_rel, float(np.max(np.abs(a.coefficients - b.coefficients) / np.abs(b.coefficients))))
        orth = np.linalg.norm(a.X.T @ a.residuals) / (np.linalg.norm(a.X) * np.linalg.norm(y))
        worst_orth = max(worst_orth, float(orth))
        max_cond = max(max_cond, cond)
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= 1e-8 and worst_orth <= 1e-8 and elapsed < 30
    record("OLS oracle suite (1000 instances)", ok,
           f"max rel coef diff {worst_rel:.2g}, max orthogonality {worst_orth:.2g}, "
           f"max cond {max_cond:.2g}, {elapsed:.2f}s")


def test_scale_shift_equivariance():
    rng = np.random.default_rng(20122)
    t0 = time.perf_counter()
    worst_t = worst_r2 = worst_b = worst_shift = 0.0
    for _ in range(100):
        X, y, _ = _random_instance(rng)
        base = inference(fit_arrays(X, y))
        k = int(rng.integers(X.shape[1]))
        name = f"x{k}"
        for c in (1e-3, 1.0, 1e3):
            Xc = X.copy()
            Xc[:, k] *= c
            rep = inference(fit_arrays(Xc, y))
            for r0, r1 in zip(base.rows, rep.rows):
                worst_t = max(worst_t, abs(r1.t_stat - r0.t_stat) / max(1.0, abs(r0.t_stat)))
            worst_r2 = max(worst_r2, abs(rep.r_squared - base.r_squared))
            b0, b1 = base.coefficient(name), rep.coefficient(name)
            worst_b = max(worst_b, abs(b1 * c - b0) / abs(b0))
        Xs = X.copy()
        Xs[:, k] += float(rng.uniform(-100, 100)) * np.abs(X[:, k]).mean()
        shifted = inference(fit_arrays(Xs, y))
        for r0, r1 in zip(base.rows, shifted.rows):
            if r0.name != "CONST":
                worst_shift = max(worst_shift, abs(r1.coefficient - r0.coefficient) / abs(r0.coefficient))
        worst_shift = max(worst_shift, abs(shifted.r_squared - base.r_squared))
    elapsed = time.perf_counter() - t0
    ok = worst_t <= 1e-10 and worst_r2 <= 1e-10 and worst_b <= 1e-10 and worst_shift <= 1e-10 and elapsed < 5
    record("Scale/shift equivariance (100 instances)", ok,
           f"max t drift {worst_t:.2g}, R² drift {worst_r2:.2g}, coef*c drift {worst_b:.2g}, "
           f"shift drift {worst_shift:.2g}, {elapsed:.2f}s")


def _recovery_error(rep, planted):
    return max(abs(rep.coefficient(k) - v) / max(1.0, abs(v)) for k, v in planted.items())


def _worst_se_ratio(rep, planted):
    return max(abs(rep.coefficient(k) - v) / rep.row(k).std_error for k, v in planted.items())


def test_planted_model_recovery():
    details, ok = [], True
    years = SyntheticSpec().years

    clean, _ = make_synthetic_panel(SyntheticSpec())
    rep = estimate_model(clean, years)
    err = _recovery_error(rep, planted_coefficients(SyntheticSpec(), "Emerging"))
    ok &= err <= 1e-8 and rep.r_squared == 1.0
    details.append(f"noiseless all: err {err:.2g}, R²={rep.r_squared}")

    noisy_spec = SyntheticSpec(noise_sd=0.01)
    noisy, _ = make_synthetic_panel(noisy_spec)
    rep = estimate_model(noisy, years)
    ratio = _worst_se_ratio(rep, planted_coefficients(noisy_spec, "Emerging"))
    ok &= ratio <= 3
    details.append(f"noisy all: worst |b-b*|/se {ratio:.2f}")

    overrides = {"Emerging": {"VOL": 0.3}, "Developed": {"VOL": 0.0}}
    for noise in (0.0, 0.01):
        spec = SyntheticSpec(class_overrides=overrides, noise_sd=noise)
        panel, _ = make_synthetic_panel(spec)
        for sub, cls in ((Subsample.EMERGING, "Emerging"), (Subsample.DEVELOPED, "Developed")):
            rep = estimate_model(panel, years, sub)
            planted = planted_coefficients(spec, cls)
            if noise == 0.0:
                err = _recovery_error(rep, planted)
                ok &= err <= 1e-8 and rep.r_squared == 1.0
                details.append(f"noiseless {sub.value} VOL={rep.coefficient('VOL'):.10f}")
            else:
                ratio = _worst_se_ratio(rep, planted)
                ok &= ratio <= 3
                details.append(f"noisy {sub.value}: {ratio:.2f} se")
    record("Planted-model recovery", ok, "; ".join(details))


def test_observation_counts(shipped_synthetic_panel):
    panel = shipped_synthetic_panel
    n = {s.value: len(build_design_matrix(panel, panel.years(), s)) for s in Subsample}
    ok = n == {"all": 171, "emerging": 99, "developed": 72} and n["all"] == n["emerging"] + n["developed"]
    record("Observation counts 171/99/72", ok, f"all={n['all']} emerging={n['emerging']} developed={n['developed']}")


TITLE = re.compile(r"^Results of regression of the basic econometric model: (all|emerging|developed) \(.+\)$")
ROW = re.compile(r"^(\S+)\s+(-?[\d.]+(e[+-]\d+)?)\s+\((-?[\d.]+|undef)\)\s+([\d.]+|undef)$")


def test_not_reproducible_statement(shipped_synthetic_panel):
    readme = (ROOT / "README.md").read_text(encoding="utf-8")
    stated = "not reproducible" in readme.lower() and "unpublished" in readme.lower()
    panel = shipped_synthetic_panel
    text = render_regression([estimate_model(panel, panel.years(), s) for s in Subsample])
    blocks = [b for b in text.split("\n\n") if b.strip()]
    layout = True
    for head, foot in zip(blocks[::2], blocks[1::2]):
        lines = head.splitlines()
        layout &= bool(TITLE.match(lines[0]))
        layout &= lines[2].split() == ["variables", "Coefficient", "Statistic-t", "p-value"]
        rows = [ROW.match(line) for line in lines[3:]]
        layout &= all(rows) and [m.group(1) for m in rows] == list(COLUMN_NAMES) + ["CONST"]
        layout &= bool(re.match(r"^R²=\d\.\d{4}\. Number of observation: \d+$", foot.strip()))
    ok = stated and layout and len(blocks) == 6
    record("Coefficient tables not reproducible (stated; format only)", ok,
           f"README statement present={stated}; regression layout rendered for 3 subsamples={layout}")


def _tree_digest(root: Path) -> str:
    h = hashlib.sha256()
    for p in sorted(root.iterdir()):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()


@pytest.mark.parametrize("dataset", ["synthetic", "paper2012"], ids=["synthetic", "tables2012"])
def test_report_all_determinism(tmp_path, capsys, dataset):
    panel_dir = str(DATA / dataset)
    t0 = time.perf_counter()
    codes = [main(["report-all", "--panel", panel_dir, "--out", str(tmp_path / f"run{i}")]) for i in (1, 2)]
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    d1, d2 = _tree_digest(tmp_path / "run1"), _tree_digest(tmp_path / "run2")
    ok = codes == [0, 0] and d1 == d2 and elapsed < 5
    record(f"report-all determinism ({'tables2012' if dataset == 'paper2012' else dataset})", ok,
           f"digests equal={d1 == d2} ({d1[:12]}), two runs in {elapsed:.2f}s")
