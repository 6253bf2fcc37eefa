"""Tabulate F2 by the Fredholm and Painleve routes side by side."""
import argparse
import csv
from pathlib import Path

import numpy as np

from odbgrowth.tw import f2_cdf, painleve_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/tw2.csv")
    ap.add_argument("--lo", type=float, default=-8.0)
    ap.add_argument("--hi", type=float, default=6.0)
    ap.add_argument("--step", type=float, default=0.05)
    args = ap.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    s = np.round(np.arange(args.lo, args.hi + 0.5 * args.step, args.step), 10)
    pain = painleve_table(s)
    worst = 0.0
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "F2", "F2_painleve", "q"])
        for v, fp, q in zip(s, pain.f2, pain.q):
            f = f2_cdf(float(v))
            worst = max(worst, abs(f - fp))
            w.writerow([repr(float(v)), repr(f), repr(float(fp)), repr(float(q))])
    print(f"{s.size} points, max |Fredholm - Painleve| = {worst:.2e}")


if __name__ == "__main__":
    main()
