"""Trace the steepest-descent curves through the quenched saddle point."""
import argparse
from pathlib import Path

from odbgrowth import rng
from odbgrowth.env import parse_dist, sample_environment
from odbgrowth.quenched import trace_steepest_curves


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dist", default="uniform:0,0.5")
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default="results/curves.csv")
    args = ap.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    env = sample_environment(parse_dist(args.dist), args.n, rng.derive_seed(args.seed, rng.COLUMN))
    curves = trace_steepest_curves(env, args.alpha)
    curves.write_csv(args.out)
    print(f"drift={curves.max_drift:.1e} C+ ends {curves.plus_end_distance:.1e} from 1; "
          f"C- end arg {curves.minus_end_arg:.4f} (limit {curves.minus_limit_arg:.4f})")


if __name__ == "__main__":
    main()
