from __future__ import annotations

from pathlib import Path

import pytest

from homebias.ingest import load_panel_dir
from homebias.synthetic import SyntheticSpec, make_synthetic_panel

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"

# criterion name -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def table_2012_panel():
    return load_panel_dir(DATA / "paper2012")


@pytest.fixture(scope="session")
def shipped_synthetic_panel():
    return load_panel_dir(DATA / "synthetic")


@pytest.fixture(scope="session")
def noiseless():
    return make_synthetic_panel(SyntheticSpec())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
