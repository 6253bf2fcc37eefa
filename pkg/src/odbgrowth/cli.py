"""Command line interface: ``odb <subcommand> ...``.

Exit codes: 0 ok, 2 regime or feasibility error, 3 numeric precision error.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import re
import sys

from . import exact, growth, lab, quenched, rng, shape, tw
from .env import Environment, parse_dist, sample_environment
from .errors import PrecisionError, RegimeError

EXIT_OK = 0
EXIT_REGIME = 2
EXIT_PRECISION = 3


def parse_range(text: str) -> list[float]:
    """``a:b:step`` (inclusive) or a comma list."""
    if ":" in text:
        a, b, step = (float(v) for v in text.split(":"))
        if step <= 0 or b < a:
            raise ValueError(f"bad range {text!r}")
        k = int(round((b - a) / step))
        return [round(a + i * step, 12) for i in range(k + 1)]
    return [float(v) for v in text.split(",") if v]


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _emit_json(obj, out) -> None:
    out.write(json.dumps(obj, indent=2, sort_keys=True, default=lab._json_default) + "\n")


def _environment(args, n_default: int | None = None) -> Environment:
    if getattr(args, "env", None):
        return Environment.load(args.env)
    if not getattr(args, "dist", None):
        raise SystemExit("need --env or --dist")
    n = args.n if getattr(args, "n", None) else n_default
    if n is None:
        raise SystemExit("need --n to sample an environment")
    return sample_environment(parse_dist(args.dist), n, rng.derive_seed(args.seed, rng.COLUMN))


# ------------------------------------------------------------ subcommands

def cmd_simulate(args) -> int:
    if args.matrix:
        env = _environment(args, args.columns)
        A = growth.sample_matrix(env, args.m, rng.derive_seed(args.seed, rng.ENTRY))
        if args.out:
            A.save(args.out)
        if args.json or not args.out:
            _emit_json({"m": A.m, "n": A.n, "H": growth.lis_length(A)}, sys.stdout)
        return EXIT_OK
    env = _environment(args, args.T + 1)
    record = [int(t) for t in parse_range(args.record)] if args.record else [args.T]
    profiles = growth.simulate_corner(env, args.T, rng.derive_seed(args.seed, rng.ENTRY),
                                      record_at=record)
    with _output(args.out) as fh:
        if args.json:
            _emit_json({str(t): h.tolist() for t, h in profiles.items()}, fh)
        else:
            growth.write_profiles(profiles, fh)
    return EXIT_OK


def cmd_shape(args) -> int:
    dist = parse_dist(args.dist)
    with _output(args.out) as fh:
        if args.alpha is not None:
            sc = shape.time_constant(args.alpha, dist)
            _emit_json(sc.__dict__, fh)
            return EXIT_OK
        pts = shape.shape_curves(dist, parse_range(args.ratios))
        if args.json:
            _emit_json([p.__dict__ for p in pts], fh)
        else:
            shape.write_shape_csv(pts, fh)
    return EXIT_OK


def cmd_quenched(args) -> int:
    if args.env:
        env = Environment.load(args.env)
    else:
        if args.n is None:
            raise SystemExit("need --n with --dist")
        env = sample_environment(parse_dist(args.dist), args.n,
                                 rng.derive_seed(args.seed, rng.COLUMN))
    qc = quenched.quenched_constants(env, args.alpha)
    payload = {"u": qc.u, "c": qc.c, "sigma3": qc.sigma3, "g": qc.g, "u_bar": qc.u_bar,
               "n": qc.n, "alpha": qc.alpha, "residual": qc.residual,
               "sigma1_residual": qc.sigma1_residual}
    if args.curves:
        curves = quenched.trace_steepest_curves(env, args.alpha, args.arclength, args.step)
        curves.write_csv(args.curves)
        payload["curve_drift"] = curves.max_drift
    with _output(args.out) as fh:
        _emit_json(payload, fh)
    return EXIT_OK


def cmd_exact(args) -> int:
    env = Environment.load(args.env)
    if args.all or args.h is None:
        rows = list(enumerate(exact.exact_cdf_all(env, args.m)))
    else:
        rows = [(args.h, exact.exact_cdf(env, args.m, args.h))]
    with _output(args.out) as fh:
        if args.json:
            _emit_json({str(h): v for h, v in rows}, fh)
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["h", "P(H<=h)"])
            for h, v in rows:
                w.writerow([h, repr(v)])
    return EXIT_OK


def cmd_tw2(args) -> int:
    s = parse_range(args.s)
    cfg = tw.QuadratureConfig(nodes=args.nodes)
    fred = [tw.f2_cdf(v, cfg) for v in s]
    pain = tw.painleve_table(s).f2
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "F2", "F2_painleve", "abs_diff"])
        for v, a, b in zip(s, fred, pain):
            w.writerow([repr(v), repr(a), repr(float(b)), repr(abs(a - float(b)))])
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.config:
        with open(args.config) as fh:
            d = json.load(fh)
        d.setdefault("seed", args.seed)
    else:
        if args.kind is None or args.alpha is None:
            raise SystemExit("need --config or --kind and --alpha")
        d = {"kind": args.kind, "alpha": args.alpha, "m": args.m, "replicas": args.replicas,
             "seed": args.seed, "dist": args.dist, "env": args.env, "n": args.n}
    if args.workers:
        d["workers"] = args.workers
    cfg = lab.ExperimentConfig.from_dict(d)
    report = lab.run_experiment(cfg)
    with _output(args.out) as fh:
        if args.json:
            fh.write(report.to_json(include_runtime=False) + "\n")
        else:
            fh.write(report.to_csv())
    if args.out and not args.json:
        sys.stderr.write(f"{report.kind}: ks={report.ks}\n")
    return EXIT_OK


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress: bool) -> argparse.ArgumentParser:
        # subcommands repeat the flags without defaults so they do not
        # overwrite values given before the subcommand name
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--seed", type=int, default=d(0), help="master seed")
        g.add_argument("--out", default=d(None), help="output path (default stdout)")
        g.add_argument("--json", action="store_true", default=d(False),
                       help="emit JSON instead of CSV")
        return g

    common = global_flags(True)
    p = argparse.ArgumentParser(prog="odb", parents=[global_flags(False)],
                                description="Oriented digital boiling in a random environment")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="corner growth run or matrix sample")
    s.add_argument("--dist")
    s.add_argument("--env")
    s.add_argument("--T", type=int, default=100)
    s.add_argument("--record", help="times to record, a:b:step or comma list")
    s.add_argument("--matrix", action="store_true", help="sample a Bernoulli matrix instead")
    s.add_argument("--m", type=int, default=10)
    s.add_argument("--columns", type=int, default=10)
    s.add_argument("--n", type=int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("shape", parents=[common], help="limit shape curves")
    s.add_argument("--dist", required=True)
    s.add_argument("--ratios", default="0.01:0.99:0.01")
    s.add_argument("--alpha", type=float, help="print the constants at one alpha")
    s.set_defaults(func=cmd_shape)

    s = sub.add_parser("quenched", parents=[common], help="quenched saddle constants")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--env")
    g.add_argument("--dist")
    s.add_argument("--n", type=int)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--curves", help="CSV path for the steepest-descent curves")
    s.add_argument("--arclength", type=float, default=10.0)
    s.add_argument("--step", type=float, default=1e-3)
    s.set_defaults(func=cmd_quenched)

    s = sub.add_parser("exact", parents=[common], help="exact law of H")
    s.add_argument("--env", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--h", type=int)
    s.add_argument("--all", action="store_true")
    s.set_defaults(func=cmd_exact)

    s = sub.add_parser("tw2", parents=[common], help="Tracy-Widom F2 table")
    s.add_argument("--s", default="-3:3:0.1")
    s.add_argument("--nodes", type=int, default=60)
    s.set_defaults(func=cmd_tw2)

    s = sub.add_parser("experiment", parents=[common], help="Monte Carlo experiment")
    s.add_argument("--config", help="JSON experiment configuration")
    s.add_argument("--kind", choices=lab.KINDS)
    s.add_argument("--dist")
    s.add_argument("--env")
    s.add_argument("--alpha", type=float)
    s.add_argument("--m", type=int, default=1000)
    s.add_argument("--n", type=int)
    s.add_argument("--replicas", type=int, default=100)
    s.add_argument("--workers", type=int, default=0)
    s.set_defaults(func=cmd_experiment)
    return p


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "--s -3:3:0.1" as two options; rewrite to "--s=-3:3:0.1"
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if tok.startswith("--") and "=" not in tok and re.match(r"-[\d.]", nxt):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        return args.func(args)
    except RegimeError as e:
        sys.stderr.write(f"regime error: {e}\n")
        return EXIT_REGIME
    except PrecisionError as e:
        sys.stderr.write(f"precision error: {e}\n")
        return EXIT_PRECISION


if __name__ == "__main__":
    sys.exit(main())
