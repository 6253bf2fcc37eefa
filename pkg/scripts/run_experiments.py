"""Run the four Monte Carlo experiments at acceptance scale and save CSV + JSON."""
import argparse
from pathlib import Path

from odbgrowth.env import PolyEdge, Uniform
from odbgrowth.lab import (ANNEALED, CN_CLT, DETERMINISTIC_HIT, QUENCHED, ExperimentConfig,
                           run_experiment)

PLANS = {
    ANNEALED: dict(alpha=1.0, m=4000, replicas=1000, dist=Uniform(0, 0.5)),
    QUENCHED: dict(alpha=1.0, m=2000, replicas=2000, dist=Uniform(0, 0.5)),
    CN_CLT: dict(alpha=1.0, n=2000, replicas=500, dist=Uniform(0, 0.5)),
    DETERMINISTIC_HIT: dict(alpha=8.0, m=500, replicas=200, dist=PolyEdge(0.5, 3),
                            ms=[50, 100, 200]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--scale", type=float, default=1.0,
                    help="multiply m and replicas (quick looks with 0.1)")
    ap.add_argument("--kinds", nargs="*", default=list(PLANS))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for kind in args.kinds:
        plan = dict(PLANS[kind])
        for key in ("m", "replicas", "n"):
            if key in plan:
                plan[key] = max(10, int(plan[key] * args.scale))
        cfg = ExperimentConfig(kind=kind, seed=args.seed, workers=args.workers,
                               csv_path=str(out / f"{kind}.csv"),
                               json_path=str(out / f"{kind}.json"), **plan)
        rep = run_experiment(cfg)
        print(f"{kind}: ks={rep.ks:.4f} runtime={rep.runtime:.1f}s constants={rep.constants}")


if __name__ == "__main__":
    main()
