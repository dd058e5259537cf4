"""Regenerate the shipped synthetic panel under data/synthetic/.

    python scripts/make_synthetic_panel.py [--seed 2012] [--noise 0.01] [--out data/synthetic]
"""

import argparse
from pathlib import Path

from homebias.ingest import write_panel_dir
from homebias.synthetic import SyntheticSpec, make_synthetic_panel

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=2012)
    ap.add_argument("--noise", type=float, default=0.01)
    ap.add_argument("--out", default=str(ROOT / "data" / "synthetic"))
    args = ap.parse_args()

    panel, planted = make_synthetic_panel(SyntheticSpec(seed=args.seed, noise_sd=args.noise))
    out = write_panel_dir(panel, args.out)
    print(f"wrote {len(panel.holdings)} holdings rows, {len(panel.positions)} positions, "
          f"{len(panel.series)} series to {out}")


if __name__ == "__main__":
    main()
