"""Seeded Monte Carlo experiments and their reports.

Every random quantity is addressed by ``(master seed, replica, purpose)``
through :mod:`odbgrowth.rng`, and replicas are merged in index order, so a
report depends only on its configuration, never on the worker count.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import rng
from .env import Distribution, Environment, from_dict, parse_dist, sample_environment
from .errors import FeasibilityError, RegimeError
from .growth import lpp_height, simulate_corner
from .quenched import QuenchedConstants, population_constants, quenched_constants
from .shape import DETERMINISTIC, PURE, ShapeConstants, classify, shape_curves, time_constant
from .tw import default_f2_table

ANNEALED = "annealed_normal"
QUENCHED = "quenched_f2"
DETERMINISTIC_HIT = "deterministic_hit"
CN_CLT = "cn_clt"
KINDS = (ANNEALED, QUENCHED, DETERMINISTIC_HIT, CN_CLT)


def ks_distance(samples, cdf: Callable) -> float:
    """sup |ECDF - cdf| over the sorted samples (both one-sided gaps)."""
    x = np.sort(np.asarray(samples, dtype=float))
    R = x.size
    if R == 0:
        raise ValueError("need at least one sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, R + 1)
    return float(np.max(np.maximum(np.abs(i / R - F), np.abs((i - 1) / R - F))))


def map_replicas(fn: Callable[[int], object], replicas: int, workers: int = 1) -> list:
    """[fn(0), ..., fn(R-1)] in replica order, optionally on a thread pool."""
    if workers <= 1:
        return [fn(r) for r in range(replicas)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(replicas)))


# ------------------------------------------------------------ statistics

def annealed_statistic(H, m: int, sc: ShapeConstants):
    """(H - c m) / (tau sqrt(alpha m))."""
    return (np.asarray(H, dtype=float) - sc.c * m) / math.sqrt(sc.tau2 * sc.alpha * m)


def quenched_statistic(H, m: int, qc: QuenchedConstants):
    """g_n (H - c_n m) / m^(1/3)."""
    return qc.g * (np.asarray(H, dtype=float) - qc.c * m) / m ** (1.0 / 3.0)


# ---------------------------------------------------------------- config

@dataclass
class ExperimentConfig:
    kind: str
    alpha: float
    m: int = 1000
    replicas: int = 100
    seed: int = 0
    dist: Distribution | None = None
    env: Environment | None = None
    n: int | None = None                  # cn_clt: environment size
    ms: Sequence[int] = ()                # deterministic_hit: extra m values
    workers: int = 1
    csv_path: str | None = None
    json_path: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.m < 1 or self.replicas < 1:
            raise ValueError("m and replicas must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.dist is None and self.env is None:
            raise ValueError("need a distribution or a fixed environment")

    @property
    def columns(self) -> int:
        return max(1, int(round(self.alpha * self.m)))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        dist = d.pop("dist", None)
        if isinstance(dist, str):
            dist = parse_dist(dist)
        elif isinstance(dist, dict):
            dist = from_dict(dist)
        env = d.pop("env", None)
        if isinstance(env, str):
            env = Environment.load(env)
        elif env is not None:
            env = Environment(np.asarray(env, dtype=float))
        return cls(dist=dist, env=env, **d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def describe(self) -> dict:
        return {"kind": self.kind, "alpha": self.alpha, "m": self.m,
                "replicas": self.replicas, "seed": self.seed, "n": self.n,
                "ms": list(self.ms),
                "dist": None if self.dist is None else json.loads(self.dist.to_json()),
                "env_size": None if self.env is None else self.env.n}


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    statistic: np.ndarray            # per replica, replica order
    reference: np.ndarray            # reference CDF at each statistic value
    ks: float
    constants: dict
    counts: dict = field(default_factory=dict)
    heights: np.ndarray | None = None
    runtime: float = 0.0
    series: list = field(default_factory=list)

    @property
    def sorted_samples(self) -> np.ndarray:
        return np.sort(self.statistic)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["replica", "H", "statistic", "reference"])
        H = self.heights if self.heights is not None else [""] * self.statistic.size
        for r, (h, s, f) in enumerate(zip(H, self.statistic, self.reference)):
            w.writerow([r, "" if h == "" else int(h), repr(float(s)), repr(float(f))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def summary(self, include_runtime: bool = True) -> dict:
        s = self.statistic
        out = {"kind": self.kind, "config": self.config, "ks": self.ks,
               "mean": float(np.mean(s)), "variance": float(np.var(s, ddof=1)) if s.size > 1 else 0.0,
               "constants": self.constants, "counts": self.counts, "series": self.series}
        if include_runtime:
            out["runtime"] = self.runtime
        return out

    def to_json(self, path=None, include_runtime: bool = True) -> str:
        text = json.dumps(self.summary(include_runtime), indent=2, sort_keys=True,
                          default=_json_default)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _finish(cfg: ExperimentConfig, report: ExperimentReport, t0: float) -> ExperimentReport:
    report.runtime = time.perf_counter() - t0
    if cfg.csv_path:
        report.to_csv(cfg.csv_path)
    if cfg.json_path:
        report.to_json(cfg.json_path)
    return report


# ------------------------------------------------------------ experiments

def _replica_env(cfg: ExperimentConfig, r: int, n: int) -> Environment:
    return sample_environment(cfg.dist, n, rng.derive_seed(cfg.seed, rng.REPLICA, r, rng.COLUMN))


def _replica_coins(cfg: ExperimentConfig, r: int) -> int:
    return rng.derive_seed(cfg.seed, rng.REPLICA, r, rng.ENTRY)


def run_pure_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Annealed CLT: fresh environment and coins per replica, compared with N(0,1)."""
    t0 = time.perf_counter()
    if cfg.dist is None:
        raise ValueError("the annealed experiment samples environments from a distribution")
    sc = time_constant(cfg.alpha, cfg.dist)
    if sc.regime != PURE:
        raise RegimeError(f"annealed experiment needs the pure regime, got {sc.regime}")
    if sc.tau2 <= 0:
        raise RegimeError("degenerate variance: tau^2 = 0 for this distribution")
    n = cfg.columns

    def one(r):
        return lpp_height(_replica_env(cfg, r, n), cfg.m, _replica_coins(cfg, r))

    H = np.asarray(map_replicas(one, cfg.replicas, cfg.workers), dtype=np.int64)
    stat = annealed_statistic(H, cfg.m, sc)
    ref = stats.norm.cdf(stat)
    report = ExperimentReport(ANNEALED, cfg.describe(), stat, ref, ks_distance(stat, stats.norm.cdf),
                              {"c": sc.c, "tau2": sc.tau2, "a": sc.a, "n": n},
                              {"replicas": cfg.replicas}, H)
    return _finish(cfg, report, t0)


def frozen_environment(cfg: ExperimentConfig) -> Environment:
    if cfg.env is not None:
        return cfg.env
    return sample_environment(cfg.dist, cfg.columns, rng.derive_seed(cfg.seed, rng.COLUMN))


def run_quenched_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Frozen environment, fresh coins per replica, compared with F2."""
    t0 = time.perf_counter()
    env = frozen_environment(cfg)
    alpha = env.n / cfg.m if cfg.env is not None else cfg.alpha
    qc = quenched_constants(env, alpha)

    def one(r):
        return lpp_height(env, cfg.m, _replica_coins(cfg, r))

    H = np.asarray(map_replicas(one, cfg.replicas, cfg.workers), dtype=np.int64)
    stat = quenched_statistic(H, cfg.m, qc)
    f2 = default_f2_table()
    report = ExperimentReport(QUENCHED, cfg.describe(), stat, np.asarray(f2(stat)),
                              ks_distance(stat, f2),
                              {"c_n": qc.c, "g_n": qc.g, "u_n": qc.u, "sigma3": qc.sigma3,
                               "n": env.n, "alpha": alpha, "G_n": qc.centering(cfg.m)},
                              {"replicas": cfg.replicas}, H)
    return _finish(cfg, report, t0)


def run_deterministic_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Fraction of replicas with H = m when alpha exceeds alpha_c."""
    t0 = time.perf_counter()
    if cfg.env is not None:
        env = cfg.env
        if np.all(env.p == 0):
            raise RegimeError("environment has no positive probability")
        hits = []
        for r in range(cfg.replicas):
            hits.append(lpp_height(env, cfg.m, _replica_coins(cfg, r)) == cfg.m)
        frac = float(np.mean(hits))
        stat = np.asarray(hits, dtype=float)
        return _finish(cfg, ExperimentReport(DETERMINISTIC_HIT, cfg.describe(), stat, stat,
                                             math.nan, {"fraction": frac}, {"hits": int(sum(hits))}),
                       t0)
    regime = classify(cfg.alpha, cfg.dist)
    if regime != DETERMINISTIC:
        raise RegimeError(f"deterministic experiment needs alpha > alpha_c, got {regime}")
    series = []
    H_main = None
    for m in [cfg.m, *[mm for mm in cfg.ms if mm != cfg.m]]:
        n = max(1, int(round(cfg.alpha * m)))

        def one(r, m=m, n=n):
            return lpp_height(_replica_env(cfg, r, n), m, _replica_coins(cfg, r))

        H = np.asarray(map_replicas(one, cfg.replicas, cfg.workers), dtype=np.int64)
        series.append({"m": m, "fraction": float(np.mean(H == m))})
        if H_main is None:
            H_main = H
    stat = (H_main == cfg.m).astype(float)
    series.sort(key=lambda d: d["m"])
    report = ExperimentReport(DETERMINISTIC_HIT, cfg.describe(), stat, stat, math.nan,
                              {"fraction": float(stat.mean())},
                              {"hits": int(stat.sum()), "replicas": cfg.replicas}, H_main,
                              series=series)
    return _finish(cfg, report, t0)


def run_cn_clt(dist: Distribution, alpha: float, n: int, replicas: int, seed: int,
               workers: int = 1) -> ExperimentReport:
    """sqrt(n)(c_n - c_0) over sampled environments against N(0, alpha^2 tau^2)."""
    t0 = time.perf_counter()
    sc = time_constant(alpha, dist)
    if sc.regime != PURE:
        raise RegimeError(f"c_n CLT needs the pure regime, got {sc.regime}")
    pop = population_constants(alpha, dist)

    def one(r):
        env = sample_environment(dist, n, rng.derive_seed(seed, rng.REPLICA, r, rng.COLUMN))
        try:
            return quenched_constants(env, alpha).c
        except FeasibilityError:
            return math.nan

    cn = np.asarray(map_replicas(one, replicas, workers), dtype=float)
    ok = ~np.isnan(cn)
    stat = math.sqrt(n) * (cn[ok] - pop.c0)
    var_ref = alpha**2 * sc.tau2
    if var_ref > 0:
        ref_cdf = stats.norm(scale=math.sqrt(var_ref)).cdf
        ks = ks_distance(stat, ref_cdf)
        ref = ref_cdf(stat)
    else:
        ks = math.nan
        ref = np.ones_like(stat)
    sample_var = float(np.var(stat, ddof=1)) if stat.size > 1 else 0.0
    cfg = {"kind": CN_CLT, "alpha": alpha, "n": n, "replicas": replicas, "seed": seed,
           "dist": json.loads(dist.to_json())}
    report = ExperimentReport(CN_CLT, cfg, stat, np.asarray(ref), ks,
                              {"c0": pop.c0, "tau2": sc.tau2, "variance_target": var_ref,
                               "sample_variance": sample_var},
                              {"replicas": replicas, "infeasible": int((~ok).sum())})
    report.runtime = time.perf_counter() - t0
    return report


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg.kind == ANNEALED:
        return run_pure_experiment(cfg)
    if cfg.kind == QUENCHED:
        return run_quenched_experiment(cfg)
    if cfg.kind == DETERMINISTIC_HIT:
        return run_deterministic_experiment(cfg)
    report = run_cn_clt(cfg.dist, cfg.alpha, cfg.n or cfg.columns, cfg.replicas, cfg.seed,
                        cfg.workers)
    return _finish(cfg, report, time.perf_counter() - report.runtime)


# -------------------------------------------------------------- snapshots

@dataclass
class SnapshotRow:
    t: int
    x: int
    h: int
    theorem2_line: float | None
    theorem3_line: float | None


def interface_snapshot(dist: Distribution, times: Sequence[int], seed: int,
                       env: Environment | None = None) -> list[SnapshotRow]:
    """Heights of one corner run against the annealed and quenched predictions."""
    times = [int(t) for t in times]
    if any(b <= a for a, b in zip(times, times[1:])) or times[0] < 1:
        raise ValueError("times must be positive and increasing")
    T = times[-1]
    if env is None:
        env = sample_environment(dist, T + 1, rng.derive_seed(seed, rng.COLUMN))
    profiles = simulate_corner(env, T, rng.derive_seed(seed, rng.ENTRY), record_at=times)
    rows = []
    for t in times:
        h = profiles[t]
        ratios = [x / t for x in range(1, t)]
        c1 = {x: pt.c1 for x, pt in zip(range(1, t), shape_curves(dist, ratios))} if ratios else {}
        for x in range(t + 1):
            line2 = c1[x] * t if x in c1 else None
            line3 = None
            if 0 <= x < t:
                try:
                    qc = quenched_constants(env.p[: x + 1], (x + 1) / (t - x))
                    line3 = qc.c * (t - x)
                except FeasibilityError:
                    pass
            rows.append(SnapshotRow(t, x, int(h[x]), line2, line3))
    return rows


def write_snapshot(rows: Sequence[SnapshotRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "h", "theorem2_line", "theorem3_line"])
        for r in rows:
            w.writerow([r.t, r.x, r.h,
                        "" if r.theorem2_line is None else repr(r.theorem2_line),
                        "" if r.theorem3_line is None else repr(r.theorem3_line)])
