import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from odbgrowth.env import Environment, PointMass, PolyEdge, Uniform
from odbgrowth.errors import RegimeError
from odbgrowth.lab import (ANNEALED, CN_CLT, DETERMINISTIC_HIT, QUENCHED, ExperimentConfig,
                           annealed_statistic, interface_snapshot, ks_distance, map_replicas,
                           quenched_statistic, run_cn_clt, run_experiment, write_snapshot)
from odbgrowth.quenched import quenched_constants
from odbgrowth.shape import time_constant

UNIFORM = Uniform(0, 0.5)


def test_ks_examples():
    assert ks_distance([0.0], stats.norm.cdf) == pytest.approx(0.5)
    assert ks_distance([1.0, 2.0], lambda x: np.zeros_like(x)) == 1.0
    assert ks_distance([0.5], lambda x: x) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ks_distance([], stats.norm.cdf)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=50))
def test_ks_agrees_with_scipy(x):
    assert ks_distance(x, stats.norm.cdf) == pytest.approx(
        stats.kstest(x, "norm").statistic, abs=1e-12)


def test_map_replicas_order():
    assert map_replicas(lambda r: r * r, 7, workers=3) == [r * r for r in range(7)]


def test_statistics_are_affine_images_of_H():
    H = np.array([400, 430, 455])
    m = 500
    sc = time_constant(1.0, UNIFORM)
    env = Environment(np.linspace(0.01, 0.49, 500))
    qc = quenched_constants(env, 1.0)
    a = annealed_statistic(H, m, sc)
    q = quenched_statistic(H, m, qc)
    back_a = a * math.sqrt(sc.tau2 * m) + sc.c * m
    back_q = q * m ** (1 / 3) / qc.g + qc.c * m
    assert np.allclose(back_a, H) and np.allclose(back_q, H)


@pytest.mark.parametrize("kind", [ANNEALED, QUENCHED])
def test_reproducible_across_workers(kind, tmp_path):
    base = dict(kind=kind, alpha=1.0, m=60, replicas=12, seed=11, dist=UNIFORM)
    r1 = run_experiment(ExperimentConfig(workers=1, csv_path=str(tmp_path / "a.csv"), **base))
    r3 = run_experiment(ExperimentConfig(workers=3, csv_path=str(tmp_path / "b.csv"), **base))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert r1.to_json(include_runtime=False) == r3.to_json(include_runtime=False)
    assert r1.to_csv().splitlines()[0] == "replica,H,statistic,reference"
    other = run_experiment(ExperimentConfig(workers=1, **{**base, "seed": 12}))
    assert not np.array_equal(other.heights, r1.heights)


def test_degenerate_variance_refused():
    with pytest.raises(RegimeError, match="degenerate"):
        run_experiment(ExperimentConfig(kind=ANNEALED, alpha=1.0, m=10, dist=PointMass(0.25)))
    with pytest.raises(RegimeError):
        run_experiment(ExperimentConfig(kind=ANNEALED, alpha=8.0, m=10, dist=PolyEdge(0.5, 3)))


def test_quenched_with_fixed_environment():
    env = Environment(np.full(40, 0.25))
    rep = run_experiment(ExperimentConfig(kind=QUENCHED, alpha=1.0, m=40, replicas=5, env=env))
    assert rep.constants["c_n"] == pytest.approx(math.sqrt(3) / 2, abs=1e-14)
    assert 0.0 <= rep.ks <= 1.0


def test_deterministic_series():
    cfg = ExperimentConfig(kind=DETERMINISTIC_HIT, alpha=8.0, m=40, replicas=20, seed=1,
                           dist=PolyEdge(0.5, 3), ms=[10, 20])
    rep = run_experiment(cfg)
    assert [d["m"] for d in rep.series] == [10, 20, 40]
    assert rep.constants["fraction"] == rep.series[-1]["fraction"]
    with pytest.raises(RegimeError):
        run_experiment(ExperimentConfig(kind=DETERMINISTIC_HIT, alpha=1.0, m=10, dist=UNIFORM))


def test_cn_clt_small():
    rep = run_cn_clt(UNIFORM, 1.0, 200, 30, 5)
    assert rep.statistic.size == 30 and rep.counts["infeasible"] == 0
    assert rep.constants["variance_target"] == pytest.approx(time_constant(1.0, UNIFORM).tau2)
    again = run_experiment(ExperimentConfig(kind=CN_CLT, alpha=1.0, n=200, replicas=30, seed=5,
                                            dist=UNIFORM))
    assert np.array_equal(again.statistic, rep.statistic)


def test_config_roundtrip(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"kind": QUENCHED, "alpha": 1.0, "m": 30, "replicas": 3,
                                "seed": 4, "dist": "uniform:0,0.5"}))
    cfg = ExperimentConfig.from_json(path)
    assert cfg.dist == UNIFORM and cfg.columns == 30
    with pytest.raises(ValueError):
        ExperimentConfig(kind="nope", alpha=1.0, dist=UNIFORM)


def test_interface_snapshot(tmp_path):
    rows = interface_snapshot(UNIFORM, [20, 40], 3)
    assert len(rows) == 21 + 41
    for r in rows:
        assert 0 <= r.h <= r.t - r.x
    interior = [r for r in rows if 0 < r.x < r.t]
    assert all(r.theorem2_line is not None for r in interior)
    path = tmp_path / "snap.csv"
    write_snapshot(rows, path)
    assert path.read_text().splitlines()[0] == "t,x,h,theorem2_line,theorem3_line"
    with pytest.raises(ValueError):
        interface_snapshot(UNIFORM, [5, 3], 1)


def test_snapshot_lines_agree_at_root_t_scale():
    rows = interface_snapshot(UNIFORM, [200, 400], 9)
    for r in rows:
        if r.theorem2_line is None or r.theorem3_line is None:
            continue
        if 0.05 < r.x / r.t < 0.7:
            assert abs(r.theorem2_line - r.theorem3_line) <= math.sqrt(r.t)
