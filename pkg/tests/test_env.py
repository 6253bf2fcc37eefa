import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from odbgrowth.env import (Discrete, Empirical, Environment, PointMass, PolyEdge, Uniform,
                           critical_alphas, expectation, from_dict, parse_dist, quantile,
                           rational_moment, sample_environment, support_bound)
from odbgrowth.errors import RegimeError

U = Uniform(0.0, 0.5)
P = PolyEdge(0.5, 3)


def test_support_bound():
    assert support_bound(U) == 0.5
    assert support_bound(P) == 0.5
    assert support_bound(PointMass(0.25)) == 0.25
    assert support_bound(Empirical([0.1, 0.4, 0.2])) == 0.4


def test_expectation_closed_forms():
    assert expectation(U, lambda p: p / (1 - p)) == pytest.approx(math.log(4) - 1, abs=1e-12)
    assert expectation(PointMass(0.3), math.exp) == math.exp(0.3)
    assert math.isinf(expectation(U, lambda p: p * (1 - p) / (0.5 - p) ** 2))


def test_quadrature_matches_rational_moment():
    # quadrature route against the substitution route for the same integrands
    for dist in (U, P, Uniform(0.1, 0.3)):
        for num, pole, power in [([0, 1], 1.0, 1), ([0, 1, -1], 0.7, 2), ([0, 0, 1], 0.6, 2),
                                 ([0, 0, 1, -1], 0.8, 3)]:
            closed = rational_moment(dist, num, pole, power)
            quad = expectation(dist, lambda p: np.polyval(num[::-1], p) / (pole - p) ** power)
            assert quad == pytest.approx(closed, rel=1e-10)


def test_polyedge_moments_exact():
    # density 24 (1/2 - s)^2 on [0, 1/2]
    alpha_c, alpha_cp = critical_alphas(P)
    assert alpha_c == pytest.approx(1 / (6 * math.log(2) - 4), abs=1e-12)
    assert alpha_cp == pytest.approx(0.5, abs=1e-12)


def test_critical_alphas():
    alpha_c, alpha_cp = critical_alphas(U)
    assert alpha_c == pytest.approx(1 / (math.log(4) - 1), abs=1e-12)
    assert alpha_cp == 0.0
    for x in (0.1, 0.25, 0.4):
        assert critical_alphas(PointMass(x)) == (pytest.approx((1 - x) / x), 0.0)
    with pytest.raises(RegimeError, match="b<1"):
        critical_alphas(Uniform(0.2, 1.0))


def test_quantile_examples():
    assert quantile(U, 0.5) == 0.25
    assert quantile(PointMass(0.3), 0.77) == 0.3
    assert quantile(P, 7 / 8) == pytest.approx(0.25, abs=1e-15)


def test_discrete_quantile_convention():
    d = Discrete((0.1, 0.2, 0.4), (0.25, 0.25, 0.5))
    # F^{-1}(v) = sup{y : F(y) < v} is the smallest atom with cumulative mass >= v
    assert d.quantile(0.25) == 0.1
    assert d.quantile(0.2500001) == 0.2
    assert d.quantile(0.5) == 0.2
    assert d.quantile(0.9) == 0.4


@settings(max_examples=60, deadline=None)
@given(st.floats(0.001, 0.999), st.floats(0.001, 0.999))
def test_quantile_monotone_and_inverse(v1, v2):
    lo, hi = sorted((v1, v2))
    for dist in (U, P, Discrete((0.1, 0.3), (0.4, 0.6))):
        assert quantile(dist, lo) <= quantile(dist, hi)
        assert dist.cdf(quantile(dist, hi)) >= hi - 1e-12
    for dist in (U, P):
        assert dist.cdf(quantile(dist, lo)) == pytest.approx(lo, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.02, 0.9), st.floats(0.05, 1.0), st.integers(1, 5))
def test_alpha_order(b, width, k):
    for dist in (Uniform(b * (1 - width), b), PolyEdge(b, k)):
        alpha_c, alpha_cp = critical_alphas(dist)
        assert alpha_cp <= alpha_c


def test_sample_environment_deterministic():
    e1 = sample_environment(U, 1000, 42)
    e2 = sample_environment(U, 1000, 42)
    assert np.array_equal(e1.p, e2.p)
    assert not np.array_equal(e1.p, sample_environment(U, 1000, 43).p)
    # prefixes agree: column j uses its own stream
    assert np.array_equal(sample_environment(U, 10, 42).p, e1.p[:10])
    assert np.array_equal(sample_environment(PointMass(0.25), 3, 7).p, [0.25] * 3)


def test_sample_environment_mean():
    e = sample_environment(U, 100_000, 11)
    sd = math.sqrt(1 / 48 / e.n)
    assert abs(e.p.mean() - 0.25) < 3 * sd


def test_environment_odds_and_validation(tmp_path):
    e = Environment(np.array([0.0, 0.25, 0.5]))
    assert np.allclose(e.r, [0.0, 1 / 3, 1.0], rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        Environment(np.array([0.2, 1.0]))
    path = tmp_path / "env.txt"
    e.save(path)
    assert np.array_equal(Environment.load(path).p, e.p)


def test_parse_and_json_roundtrip(tmp_path):
    assert parse_dist("uniform:0,0.5") == U
    assert parse_dist("poly:0.5,3") == P
    assert parse_dist("point:0.25") == PointMass(0.25)
    f = tmp_path / "d.json"
    f.write_text(P.to_json())
    assert parse_dist(f"file:{f}") == P
    assert from_dict(json.loads(U.to_json())) == U
    s = tmp_path / "samples.txt"
    s.write_text("0.1 0.2\n0.3\n")
    assert parse_dist(f"file:{s}").b == 0.3
