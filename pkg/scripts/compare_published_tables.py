"""Print recomputed global and bilateral home bias next to the published 2012 values."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from reference_tables import BILATERAL_2012, HB_2012  # noqa: E402

from homebias.ingest import load_panel_dir  # noqa: E402
from homebias.metrics import bilateral_table, hb_table  # noqa: E402


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--panel", default=str(ROOT / "data" / "paper2012"))
    args = ap.parse_args(argv)
    panel = load_panel_dir(args.panel)

    print("global HB, 2012 (tolerance 1e-6)")
    rows, _ = hb_table(panel, 2012)
    for r in rows:
        pub = HB_2012[r.country][2]
        diff = abs(r.hb - pub)
        print(f"  {r.country}  computed {r.hb:.9f}  published {pub:.9f}  diff {diff:.2e}  {'ok' if diff < 1e-6 else 'MISS'}")

    print("bilateral HB, 2012 (tolerance 5e-4)")
    rows, _ = bilateral_table(panel, 2012)
    for r in rows:
        pub = BILATERAL_2012[r.destination][3]
        diff = abs(r.hb_bilateral - pub)
        print(f"  {r.destination}  computed {r.hb_bilateral:.5f}  published {pub:.5f}  diff {diff:.1e}  "
              f"{'ok' if diff < 5e-4 else 'MISS'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
