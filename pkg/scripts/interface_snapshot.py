"""One corner-growth run with the annealed and quenched prediction lines."""
import argparse
from pathlib import Path

from odbgrowth.env import parse_dist
from odbgrowth.lab import interface_snapshot, write_snapshot


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dist", default="uniform:0,0.5")
    ap.add_argument("--times", default="250,500,1000")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default="results/snapshot.csv")
    args = ap.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    rows = interface_snapshot(parse_dist(args.dist), [int(t) for t in args.times.split(",")],
                              args.seed)
    write_snapshot(rows, args.out)
    print(f"{len(rows)} rows written to {args.out}")


if __name__ == "__main__":
    main()
