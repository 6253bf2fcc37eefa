"""ODB height dynamics, Bernoulli matrices and longest increasing paths.

Conventions
-----------
* Matrix rows are counted from the bottom; ``bits[0]`` is the bottom row.
* Entry (row i, column j) (1-based) is 1 iff the ENTRY uniform keyed by
  ``(seed, i, j-1)`` is below p_j.
* Site x of the growth process uses column probability ``p[x]``; its coin at
  time t is the entry in row ``t - x + 1`` of column x.  With this
  identification ``h_t(x) = H(t - x, x + 1)`` holds path by path, because
  the column-sweep recursion for H is the ODB recursion in disguise.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from . import rng
from .env import Distribution, Environment, sample_environment

NEG = np.iinfo(np.int64).min // 4  # stands for -infinity


# ------------------------------------------------------------------ heights

@dataclass
class GrowthState:
    """Heights h_t(x) for sites ``0..len(heights)-1``; ``NEG`` is -infinity."""

    t: int
    heights: np.ndarray

    @classmethod
    def corner(cls, window: int) -> "GrowthState":
        h = np.full(window, NEG, dtype=np.int64)
        h[0] = 0
        return cls(0, h)

    @property
    def window(self) -> int:
        return self.heights.size

    def finite(self) -> np.ndarray:
        return self.heights > NEG // 2


class WindowOverflow(ValueError):
    pass


def odb_step(state: GrowthState, probs: Sequence[float], coins) -> GrowthState:
    """h_{t+1}(x) = max(h_t(x-1), h_t(x) + eps_{x,t}) at every site at once.

    ``coins`` is either an array of uniforms (one per site; eps = u < p) or a
    callable ``coins(t, window)`` returning such an array.
    """
    h = state.heights
    w = h.size
    fin = state.finite()
    if fin[-1]:
        last = int(np.nonzero(fin)[0][-1])
        raise WindowOverflow(f"window of {w} sites too small; need at least {last + 2}")
    u = coins(state.t, w) if callable(coins) else np.asarray(coins, dtype=float)[:w]
    eps = (u < np.asarray(probs, dtype=float)[:w]).astype(np.int64)
    left = np.empty_like(h)
    left[0] = NEG
    left[1:] = h[:-1]
    grown = np.where(fin, h + eps, NEG)
    return GrowthState(state.t + 1, np.maximum(left, grown))


def corner_coins(seed: int):
    """Coin source for :func:`odb_step` matching :func:`sample_matrix` entries."""

    def coins(t, window):
        x = np.arange(window)
        rows = t - x + 1
        out = np.ones(window)
        live = rows >= 1
        if live.any():
            k = int(live.sum())
            # entry (row t-x+1, column x) for x = 0..k-1
            u = rng.entry_uniforms(seed, t + 1, k)
            out[:k] = u[rows[:k] - 1, np.arange(k)]
        return out

    return coins


@njit(cache=True, nogil=True)
def _corner_run(p, T, key, record):
    # record[t] == 1 marks times to store; returns (len(rec), T+1) array
    nrec = 0
    for t in range(T + 1):
        nrec += record[t]
    out = np.full((nrec, T + 1), NEG, dtype=np.int64)
    h = np.full(T + 2, NEG, dtype=np.int64)
    h[0] = 0
    k = 0
    if record[0]:
        out[k, :] = h[: T + 1]
        k += 1
    for t in range(T):
        # descending x keeps h[x-1] at its time-t value
        for x in range(t + 1, -1, -1):
            grown = NEG
            if h[x] > NEG // 2:
                ck = rng._column_key(key, x)
                bits = rng._entry_bits(ck, t - x + 1)
                e = 1 if bits < rng.bernoulli_threshold(p[x]) else 0
                grown = h[x] + e
            left = h[x - 1] if x > 0 else NEG
            h[x] = left if left > grown else grown
        if record[t + 1]:
            out[k, :] = h[: T + 1]
            k += 1
    return out


def simulate_corner(p: Sequence[float] | Environment, T: int, seed: int,
                    record_at: Iterable[int] | None = None) -> dict[int, np.ndarray]:
    """Run ODB from the corner state for ``T`` steps.

    Returns ``{t: heights[0..t]}`` for every requested time (default: ``T``).
    Site x uses ``p[x]``; ``p`` must cover sites ``0..T``.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    probs = np.asarray(p.p if isinstance(p, Environment) else p, dtype=float)
    if probs.size < T + 1:
        raise ValueError(f"need probabilities for sites 0..{T}")
    times = sorted(set([T] if record_at is None else record_at))
    if times and (times[0] < 0 or times[-1] > T):
        raise ValueError("record times must lie in [0, T]")
    mask = np.zeros(T + 1, dtype=np.int64)
    mask[times] = 1
    key = np.uint64(rng.stream_key(seed, rng.ENTRY))
    rows = _corner_run(probs[: T + 1].copy(), T, key, mask)
    return {t: rows[i, : t + 1].copy() for i, t in enumerate(times)}


def write_profiles(profiles: dict[int, np.ndarray], path_or_file) -> None:
    """CSV with columns t,x,h; accepts a path or an open text file."""
    def emit(fh):
        fh.write("t,x,h\n")
        for t in sorted(profiles):
            for x, v in enumerate(profiles[t]):
                fh.write(f"{t},{x},{int(v)}\n")

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w") as fh:
            emit(fh)


# ------------------------------------------------------------------ matrices

@dataclass
class BernoulliMatrix:
    """0/1 matrix with ``bits[i, j]`` = entry in row i+1 (from the bottom), column j+1."""

    bits: np.ndarray
    p: np.ndarray

    @property
    def m(self) -> int:
        return self.bits.shape[0]

    @property
    def n(self) -> int:
        return self.bits.shape[1]

    def save(self, path) -> None:
        lines = [f"{self.m} {self.n}"]
        lines += [repr(float(v)) for v in self.p]
        lines += ["".join(str(int(b)) for b in row) for row in self.bits]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "BernoulliMatrix":
        lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
        m, n = (int(v) for v in lines[0].split())
        p = np.array([float(v) for v in lines[1 : 1 + n]])
        rows = [ln.replace(" ", "") for ln in lines[1 + n : 1 + n + m]]
        bits = np.array([[int(ch) for ch in row] for row in rows], dtype=np.uint8)
        if bits.shape != (m, n):
            raise ValueError("matrix body does not match header")
        return cls(bits, p)


def sample_matrix(envr: Environment | Sequence[float], m: int, seed: int) -> BernoulliMatrix:
    if m < 1:
        raise ValueError("m must be >= 1")
    p = np.asarray(envr.p if isinstance(envr, Environment) else envr, dtype=float)
    u = rng.entry_uniforms(seed, m, p.size)
    return BernoulliMatrix((u < p[None, :]).astype(np.uint8), p.copy())


@njit(cache=True, nogil=True)
def _lis_bits(bits):
    m, n = bits.shape
    best = np.zeros(m + 1, dtype=np.int64)
    for j in range(n):
        for i in range(m):
            v = best[i] + bits[i, j]
            if v > best[i + 1]:
                best[i + 1] = v
    return best[m]


def lis_length(A: BernoulliMatrix | np.ndarray) -> int:
    """Longest chain of 1's with nondecreasing column and strictly increasing row.

    Columns are swept left to right; ``best[i]`` is the longest path using
    rows ``<= i`` seen so far.
    """
    bits = A.bits if isinstance(A, BernoulliMatrix) else np.asarray(A)
    bits = np.ascontiguousarray(bits, dtype=np.int64)
    if bits.ndim != 2 or bits.size == 0:
        return 0
    return int(_lis_bits(bits))


@njit(cache=True, nogil=True)
def _lpp_from_key(p, m, key):
    n = p.shape[0]
    best = np.zeros(m + 1, dtype=np.int32)
    for j in range(n):
        thr = rng.bernoulli_threshold(p[j])
        ck = rng._column_key(key, j)
        for i in range(1, m + 1):
            e = 1 if rng._entry_bits(ck, i) < thr else 0
            v = best[i - 1] + e
            if v > best[i]:
                best[i] = v
    return best[m]


def lpp_height(p: Sequence[float] | Environment, m: int, seed: int) -> int:
    """H for the matrix ``sample_matrix(p, m, seed)`` without materialising it."""
    probs = np.ascontiguousarray(p.p if isinstance(p, Environment) else p, dtype=float)
    key = np.uint64(rng.stream_key(seed, rng.ENTRY))
    return int(_lpp_from_key(probs, m, key))


@njit(cache=True, nogil=True)
def _lpp_batch(p, m, keys, out):
    for r in range(keys.shape[0]):
        out[r] = _lpp_from_key(p, m, keys[r])


def lpp_heights(p, m: int, seeds: Sequence[int]) -> np.ndarray:
    """H for a frozen environment under several coin seeds."""
    probs = np.ascontiguousarray(p.p if isinstance(p, Environment) else p, dtype=float)
    keys = np.array([rng.stream_key(s, rng.ENTRY) for s in seeds], dtype=np.uint64)
    out = np.zeros(keys.size, dtype=np.int64)
    _lpp_batch(probs, m, keys, out)
    return out


# ----------------------------------------------------------------- checks

def ecdf_on_support(samples: np.ndarray, top: int) -> np.ndarray:
    """F(h) = fraction of samples <= h for h = 0..top."""
    counts = np.bincount(np.asarray(samples, dtype=np.int64), minlength=top + 1)[: top + 1]
    return np.cumsum(counts) / len(samples)


@dataclass
class CouplingReport:
    t: int
    x: int
    ecdf_height: np.ndarray
    ecdf_matrix: np.ndarray
    ks: float
    exact: np.ndarray | None
    max_sigma_height: float | None
    max_sigma_matrix: float | None


def coupling_check(dist: Distribution, t: int, x: int, replicas: int, seed: int,
                   exact_limit: int = 24) -> CouplingReport:
    """Compare the law of h_t(x) with that of H(t - x, x + 1).

    Heights come from corner runs and matrices from independent streams;
    for small boards both are also compared with the exact annealed law.
    """
    if not 0 <= x <= t:
        raise ValueError("need 0 <= x <= t")
    m, n = t - x, x + 1
    hs = np.empty(replicas, dtype=np.int64)
    Hs = np.empty(replicas, dtype=np.int64)
    for r in range(replicas):
        s_env1 = rng.derive_seed(seed, rng.REPLICA, r, 0)
        s_coin1 = rng.derive_seed(seed, rng.REPLICA, r, 1)
        s_env2 = rng.derive_seed(seed, rng.REPLICA, r, 2)
        s_coin2 = rng.derive_seed(seed, rng.REPLICA, r, 3)
        e1 = sample_environment(dist, t + 1, s_env1)
        hs[r] = simulate_corner(e1, t, s_coin1)[t][x] if t >= 1 else 0
        e2 = sample_environment(dist, n, s_env2)
        Hs[r] = lpp_height(e2, m, s_coin2) if m >= 1 else 0
    F1 = ecdf_on_support(hs, m)
    F2 = ecdf_on_support(Hs, m)
    ks = float(np.max(np.abs(F1 - F2)))
    exact = sig1 = sig2 = None
    if m >= 1 and m * n <= exact_limit:
        from .exact import annealed_brute_force_cdf

        exact = np.array([annealed_brute_force_cdf(dist, m, n, h) for h in range(m + 1)])
        sd = np.sqrt(np.maximum(exact * (1 - exact), 1e-300) / replicas)
        live = exact * (1 - exact) > 0
        sig1 = float(np.max(np.abs(F1 - exact)[live] / sd[live], initial=0.0))
        sig2 = float(np.max(np.abs(F2 - exact)[live] / sd[live], initial=0.0))
    return CouplingReport(t, x, F1, F2, ks, exact, sig1, sig2)


def cdf_dominates(dist1: Distribution, dist2: Distribution, grid: int = 2001) -> bool:
    """True when F1 <= F2 on a grid of [0, 1] plus all atoms."""
    pts = [np.linspace(0.0, 1.0, grid)]
    for d in (dist1, dist2):
        a = d.atoms()
        if a is not None:
            pts.append(a[0])
    s = np.unique(np.concatenate(pts))
    return bool(np.all(np.asarray(dist1.cdf(s)) <= np.asarray(dist2.cdf(s)) + 1e-15))


def monotone_coupling_check(dist1: Distribution, dist2: Distribution, m: int, n: int,
                            trials: int, seed: int) -> int:
    """Count trials with H(F2) > H(F1) when both matrices share all uniforms.

    Needs F1 <= F2, i.e. F1 stochastically larger; the count should be 0.
    """
    if not cdf_dominates(dist1, dist2):
        raise ValueError("could not verify F1 <= F2 on the test grid")
    violations = 0
    for r in range(trials):
        s = rng.derive_seed(seed, rng.REPLICA, r)
        c = rng.column_uniforms(s, n)
        p1 = np.asarray(dist1.quantile(c), dtype=float)
        p2 = np.asarray(dist2.quantile(c), dtype=float)
        if lpp_height(p2, m, s) > lpp_height(p1, m, s):
            violations += 1
    return violations


# ------------------------------------------------------------- renewal walk

@njit(cache=True, nogil=True)
def _renewal_first_one(keys, p_block, col0, out_xi):
    # out_xi[r] == 0 means unresolved; scans this block of columns
    R, K = p_block.shape
    for r in range(R):
        if out_xi[r] > 0:
            continue
        for jj in range(K):
            ck = rng._column_key(keys[r], col0 + jj)
            if rng._entry_bits(ck, 1) < rng.bernoulli_threshold(p_block[r, jj]):
                out_xi[r] = col0 + jj + 1
                break


@njit(cache=True, nogil=True)
def _renewal_run_of_ones(keys, xi, p_at, out_eta):
    for r in range(keys.shape[0]):
        ck = rng._column_key(keys[r], xi[r] - 1)
        thr = rng.bernoulli_threshold(p_at[r])
        k = 1
        while rng._entry_bits(ck, 1 + k) < thr:
            k += 1
        out_eta[r] = k


@dataclass
class RenewalTable:
    k: np.ndarray
    xi_empirical: np.ndarray
    xi_analytic: np.ndarray
    eta_empirical: np.ndarray
    eta_analytic: np.ndarray
    xi: np.ndarray
    eta: np.ndarray


def sample_renewal_steps(dist: Distribution, replicas: int, seed: int, block: int = 32,
                         chunk: int = 100_000) -> tuple[np.ndarray, np.ndarray]:
    """Draw (xi_1, eta_1) of the renewal walk for independent replicas.

    Starting below row 1, xi_1 is the first column whose row-1 entry is 1 and
    eta_1 the offset of the first 0 above that entry.  Every column draws a
    fresh p from ``dist``.
    """
    xi = np.zeros(replicas, dtype=np.int64)
    eta = np.zeros(replicas, dtype=np.int64)
    col_key = np.uint64(rng.stream_key(seed, rng.COLUMN))
    for start in range(0, replicas, chunk):
        stop = min(replicas, start + chunk)
        rs = np.arange(start, stop)
        keys = np.array([rng.derive_seed(seed, rng.RENEWAL, int(r)) for r in rs], dtype=np.uint64)
        cxi = np.zeros(rs.size, dtype=np.int64)
        p_found = np.zeros(rs.size)
        col0 = 0
        while np.any(cxi == 0):
            todo = np.nonzero(cxi == 0)[0]
            c = np.empty((todo.size, block))
            for a, idx in enumerate(todo):
                c[a] = rng._column_uniforms(keys[idx] ^ col_key, col0, block)
            p = np.asarray(dist.quantile(c), dtype=float).reshape(todo.size, block)
            sub = np.zeros(todo.size, dtype=np.int64)
            _renewal_first_one(keys[todo], p, col0, sub)
            hit = sub > 0
            cxi[todo[hit]] = sub[hit]
            p_found[todo[hit]] = p[hit, sub[hit] - 1 - col0]
            col0 += block
            if col0 > 10_000_000:
                raise RuntimeError("renewal walk did not find a 1; is <p> > 0?")
        ceta = np.zeros(rs.size, dtype=np.int64)
        _renewal_run_of_ones(keys, cxi, p_found, ceta)
        xi[start:stop] = cxi
        eta[start:stop] = ceta
    return xi, eta


def renewal_tail_stats(dist: Distribution, k_max: int, replicas: int, seed: int) -> RenewalTable:
    """Empirical vs analytic P(xi >= k) = <1-p>^{k-1} and P(eta >= k) = <p^k>/<p>."""
    mean_p = dist.moment([0.0, 1.0], 1.0, 0)
    if mean_p <= 0:
        raise ValueError("renewal walk needs <p> > 0")
    xi, eta = sample_renewal_steps(dist, replicas, seed)
    ks = np.arange(1, k_max + 1)
    q = dist.moment([1.0, -1.0], 1.0, 0)
    xi_an = q ** (ks - 1.0)
    eta_an = np.array([dist.moment([0.0] * k + [1.0], 1.0, 0) for k in ks]) / mean_p
    xi_emp = np.array([(xi >= k).mean() for k in ks])
    eta_emp = np.array([(eta >= k).mean() for k in ks])
    return RenewalTable(ks, xi_emp, xi_an, eta_emp, eta_an, xi, eta)
