import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from odbgrowth.env import PointMass, Uniform
from odbgrowth.exact import brute_force_cdf
from odbgrowth.growth import (NEG, BernoulliMatrix, GrowthState, WindowOverflow,
                              corner_coins, coupling_check, lis_length, lpp_height, lpp_heights,
                              monotone_coupling_check, odb_step, renewal_tail_stats,
                              sample_matrix, simulate_corner, write_profiles)

bit_matrices = st.integers(1, 6).flatmap(
    lambda m: st.integers(1, 6).flatmap(
        lambda n: st.lists(st.integers(0, 1), min_size=m * n, max_size=m * n).map(
            lambda b: np.array(b, dtype=np.uint8).reshape(m, n))))


def lis_bruteforce(bits):
    """Longest chain with nondecreasing column and strictly increasing row, by DFS."""
    m, n = bits.shape
    ones = [(i, j) for i in range(m) for j in range(n) if bits[i, j]]
    best = {}
    for i, j in sorted(ones):
        best[(i, j)] = 1 + max((best[(a, b)] for (a, b) in best if a < i and b <= j), default=0)
    return max(best.values(), default=0)


# ----------------------------------------------------------------- heights

def test_one_step_from_corner():
    s0 = GrowthState.corner(4)
    s1 = odb_step(s0, [0.3] * 4, [0.1, 0.9, 0.9, 0.9])
    assert s1.heights[0] == 1 and s1.heights[1] == 0
    s1 = odb_step(s0, [0.3] * 4, [0.5, 0.0, 0.0, 0.0])
    assert s1.heights[0] == 0 and s1.heights[1] == 0
    assert s1.heights[2] == NEG


def test_forced_coins():
    ones = GrowthState.corner(12)
    zeros = GrowthState.corner(12)
    for _ in range(10):
        ones = odb_step(ones, [1.0] * 12, np.zeros(12))
        zeros = odb_step(zeros, [0.0] * 12, np.zeros(12))
    assert ones.heights[0] == 10
    assert np.all(zeros.heights[:11] == 0)


def test_window_overflow():
    s = GrowthState.corner(2)
    s = odb_step(s, [0.5, 0.5], [0.0, 0.0])
    with pytest.raises(WindowOverflow, match="at least 3"):
        odb_step(s, [0.5, 0.5], [0.0, 0.0])


def test_step_matches_simulate_corner():
    p = np.linspace(0.05, 0.45, 31)
    T = 30
    prof = simulate_corner(p, T, 9, record_at=range(T + 1))
    s = GrowthState.corner(T + 2)
    coins = corner_coins(9)
    probs = np.append(p, 0.5)
    for t in range(T):
        s = odb_step(s, probs, coins)
        assert np.array_equal(s.heights[: t + 2], prof[t + 1])


def test_corner_invariants():
    T = 200
    p = np.full(T + 1, 0.3)
    prof = simulate_corner(p, T, 4, record_at=range(0, T + 1, 10))
    prev = None
    for t, h in sorted(prof.items()):
        x = np.arange(t + 1)
        assert np.all(h <= t - x)
        assert np.all(h >= 0)
        if prev is not None:
            pt, ph = prev
            assert np.all(h[: pt + 1] >= ph)
        prev = (t, h)


def test_record_sets_do_not_change_profiles():
    p = np.full(51, 0.25)
    a = simulate_corner(p, 50, 3, record_at=[10, 50])
    b = simulate_corner(p, 50, 3, record_at=[10, 20, 30, 50])
    assert np.array_equal(a[10], b[10]) and np.array_equal(a[50], b[50])


def test_one_step_law():
    # h_1(0) = 1 with probability p_0
    R = 100_000
    p = [0.25, 0.25]
    h = np.array([simulate_corner(p, 1, s)[1][0] for s in range(R)])
    assert abs(h.mean() - 0.25) < 3 * math.sqrt(0.25 * 0.75 / R)


def test_write_profiles(tmp_path):
    path = tmp_path / "h.csv"
    write_profiles(simulate_corner([0.5] * 4, 3, 1, record_at=[1, 3]), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x,h" and len(lines) == 1 + 2 + 4


# ---------------------------------------------------------------- matrices

def test_lis_examples():
    assert lis_length(np.array([[1]])) == 1
    assert lis_length(np.ones((2, 2))) == 2
    # rows listed bottom to top
    assert lis_length(np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1]])) == 3
    assert lis_length(np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]])) == 1


@settings(max_examples=200, deadline=None)
@given(bit_matrices)
def test_lis_against_bruteforce(bits):
    assert lis_length(bits) == lis_bruteforce(bits)


@settings(max_examples=100, deadline=None)
@given(bit_matrices, st.data())
def test_lis_monotone_under_growth(bits, data):
    H = lis_length(bits)
    m, n = bits.shape
    assert H <= m
    i = data.draw(st.integers(0, m - 1))
    j = data.draw(st.integers(0, n - 1))
    flipped = bits.copy()
    flipped[i, j] = 1
    assert lis_length(flipped) >= H
    assert lis_length(np.vstack([bits, np.zeros((1, n), np.uint8)])) >= H
    assert lis_length(np.hstack([bits, np.zeros((m, 1), np.uint8)])) >= H


def test_sample_matrix_subrectangles():
    p = np.linspace(0.1, 0.6, 7)
    big = sample_matrix(p, 9, 5)
    small = sample_matrix(p[:3], 5, 5)
    assert np.array_equal(big.bits[:5, :3], small.bits)
    assert not sample_matrix(np.zeros(4), 6, 1).bits.any()


def test_sample_matrix_density():
    m = 100_000
    p = np.array([0.999, 0.3])
    A = sample_matrix(p, m, 8)
    for j in range(2):
        sd = math.sqrt(p[j] * (1 - p[j]) / m)
        assert abs(A.bits[:, j].mean() - p[j]) < 3 * sd


def test_lpp_height_matches_matrix():
    p = np.linspace(0.05, 0.45, 40)
    for seed in range(5):
        assert lpp_height(p, 60, seed) == lis_length(sample_matrix(p, 60, seed))
    assert list(lpp_heights(p, 60, range(5))) == [lpp_height(p, 60, s) for s in range(5)]


def test_matrix_dump_roundtrip(tmp_path):
    A = sample_matrix([0.2, 0.7, 0.4], 5, 3)
    path = tmp_path / "a.txt"
    A.save(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "5 3" and len(lines) == 1 + 3 + 5
    B = BernoulliMatrix.load(path)
    assert np.array_equal(A.bits, B.bits) and np.array_equal(A.p, B.p)


# --------------------------------------------------------------- couplings

def test_pathwise_height_equals_lpp():
    p = np.linspace(0.05, 0.45, 41)
    T = 40
    prof = simulate_corner(p, T, 17)[T]
    for x in range(T):
        assert prof[x] == lpp_height(p[: x + 1], T - x, 17)


def _height_law_by_coins(p, t, x):
    """Exact law of h_t(x) by enumerating every coin of sites 0..x at times 0..t-1."""
    k = (x + 1) * t
    law = {}
    pf = [Fraction(v) for v in p[: x + 1]]
    for bits in itertools.product((0, 1), repeat=k):
        e = np.array(bits).reshape(t, x + 1)
        s = GrowthState.corner(t + 2)
        for step in range(t):
            coins = np.ones(t + 2)
            coins[: x + 1] = np.where(e[step] == 1, -1.0, 2.0)
            s = odb_step(s, np.ones(t + 2), coins)
        w = Fraction(1)
        for y in range(x + 1):
            ones = int(e[:, y].sum())
            w *= pf[y] ** ones * (1 - pf[y]) ** (t - ones)
        h = int(s.heights[x])
        law[h] = law.get(h, 0) + w
    return law


@pytest.mark.parametrize("t,x", [(1, 0), (3, 1), (4, 1), (5, 2), (4, 3)])
def test_height_law_equals_matrix_law_exactly(t, x):
    p = [0.5, 0.25, 0.375, 0.125][: x + 1] + [0.5] * 4
    law = _height_law_by_coins(p, t, x)
    cdf = Fraction(0)
    for h in range(t - x + 1):
        cdf += law.get(h, 0)
        assert cdf == brute_force_cdf(p[: x + 1], t - x, h, exact=True)


def test_coupling_check_small():
    rep = coupling_check(PointMass(0.5), 1, 0, 2000, 1)
    assert rep.exact is not None and rep.exact[0] == pytest.approx(0.5)
    rep = coupling_check(PointMass(0.5), 3, 1, 20_000, 2)
    assert rep.exact[1] == pytest.approx(0.5)
    assert rep.max_sigma_height < 3 and rep.max_sigma_matrix < 3
    again = coupling_check(PointMass(0.5), 3, 1, 20_000, 2)
    assert again.ks == rep.ks


def test_monotone_coupling():
    assert monotone_coupling_check(Uniform(0, 0.5), Uniform(0, 0.5), 8, 8, 300, 1) == 0
    assert monotone_coupling_check(PointMass(0.4), PointMass(0.2), 10, 10, 2000, 2) == 0
    assert monotone_coupling_check(Uniform(0.1, 0.5), PointMass(0.1), 10, 10, 2000, 3) == 0


def test_monotone_coupling_refuses_unordered_pair():
    with pytest.raises(ValueError, match="F1 <= F2"):
        monotone_coupling_check(Uniform(0, 0.5), PointMass(0.1), 10, 10, 10, 3)


# ------------------------------------------------------------------ renewal

def test_renewal_point_mass():
    tab = renewal_tail_stats(PointMass(0.5), 5, 50_000, 1)
    assert np.allclose(tab.xi_analytic, 0.5 ** np.arange(5))
    assert np.allclose(tab.eta_analytic, 0.5 ** np.arange(5))
    assert tab.xi_empirical[0] == 1.0 and tab.eta_empirical[0] == 1.0
    R = 50_000
    for emp, an in [(tab.xi_empirical, tab.xi_analytic), (tab.eta_empirical, tab.eta_analytic)]:
        assert np.all(np.abs(emp - an) < 4 * np.sqrt(an * (1 - an) / R) + 1e-12)


def test_renewal_needs_positive_mean():
    with pytest.raises(ValueError):
        renewal_tail_stats(PointMass(0.0), 3, 10, 1)
