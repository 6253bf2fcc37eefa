"""Limit height c1 and variance rate c2 against x/t for the two reference laws."""
import argparse
from pathlib import Path

import numpy as np

from odbgrowth.env import PolyEdge, Uniform
from odbgrowth.shape import regime_windows, shape_curves, write_shape_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--points", type=int, default=199)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ratios = np.linspace(0.005, 0.995, args.points)
    for name, dist in (("uniform", Uniform(0, 0.5)), ("polyedge", PolyEdge(0.5, 3))):
        write_shape_csv(shape_curves(dist, ratios), out / f"shape_{name}.csv")
        lo, hi = regime_windows(dist)
        print(f"{name}: pure window in x/t = ({lo:.4f}, {hi:.4f})")


if __name__ == "__main__":
    main()
