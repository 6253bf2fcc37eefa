"""Exact finite-size law of H.

Two independent routes:

* the Toeplitz identity P(H <= h) = prod(1 - p_j)^m * D_h(phi) with symbol
  phi(z) = (1 - 1/z)^(-m) * prod(1 + r_j z), evaluated in exact rational
  arithmetic (floats are converted to the rationals they represent);
* brute-force enumeration of all 2^(mn) matrices, grouped by the column
  counts of ones so that one enumeration serves every environment.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .env import Distribution, Environment
from .errors import PrecisionError

BRUTE_FORCE_LIMIT = 24


def _as_fractions(envr) -> list[Fraction]:
    vals = envr.p if isinstance(envr, Environment) else envr
    out = [v if isinstance(v, Fraction) else Fraction(float(v)) for v in vals]
    # sorted so that every symmetric function is computed in the same order
    return sorted(out)


def elementary_symmetric(values: Sequence) -> list:
    """e_0..e_n of ``values`` via the product recurrence of prod(1 + v z)."""
    e = [Fraction(1) if isinstance(values[0], Fraction) else 1.0] if len(values) else [1]
    for v in values:
        e = [e[0]] + [e[l] + v * e[l - 1] for l in range(1, len(e))] + [v * e[-1]]
    return e


@dataclass(frozen=True)
class ToeplitzSymbol:
    m: int
    r: tuple
    e: tuple

    @property
    def n(self) -> int:
        return len(self.r)

    def coeff(self, k: int):
        """phi_k = sum_{l >= max(k, 0)} e_l * C(m + l - k - 1, l - k)."""
        if k > self.n:
            return Fraction(0)
        total = Fraction(0)
        for l in range(max(k, 0), self.n + 1):
            j = l - k
            total += self.e[l] * (comb(self.m + j - 1, j) if j > 0 else 1)
        return total


def build_symbol(envr, m: int) -> ToeplitzSymbol:
    if m < 1:
        raise ValueError("m must be >= 1")
    p = _as_fractions(envr)
    if any(v >= 1 for v in p):
        raise ValueError("the Toeplitz route needs every p_j < 1")
    r = tuple(v / (1 - v) for v in p)
    return ToeplitzSymbol(m, r, tuple(elementary_symmetric(list(r))))


def symbol_coeffs(envr, m: int, k_range: Sequence[int]) -> list[Fraction]:
    sym = build_symbol(envr, m)
    return [sym.coeff(k) for k in k_range]


def _leading_minors(T: list[list[Fraction]]) -> list[Fraction]:
    """All leading principal minors D_1..D_N by elimination without pivoting.

    A zero pivot (D_h = 0) switches to a separate determinant per size.
    """
    N = len(T)
    A = [row[:] for row in T]
    minors = []
    det = Fraction(1)
    for k in range(N):
        piv = A[k][k]
        if piv == 0:
            return minors + [_det([row[:h] for row in T[:h]]) for h in range(k + 1, N + 1)]
        det *= piv
        minors.append(det)
        inv = 1 / piv
        for i in range(k + 1, N):
            f = A[i][k] * inv
            if f:
                Ai, Ak = A[i], A[k]
                for j in range(k + 1, N):
                    Ai[j] -= f * Ak[j]
    return minors


def _det(A: list[list[Fraction]]) -> Fraction:
    A = [row[:] for row in A]
    N = len(A)
    det = Fraction(1)
    for k in range(N):
        piv = next((i for i in range(k, N) if A[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            det = -det
        det *= A[k][k]
        for i in range(k + 1, N):
            f = A[i][k] / A[k][k]
            for j in range(k + 1, N):
                A[i][j] -= f * A[k][j]
    return det


def exact_cdf_all(envr, m: int, exact: bool = False) -> list:
    """[P(H <= h) for h = 0..m]."""
    sym = build_symbol(envr, m)
    p = _as_fractions(envr)
    prefactor = Fraction(1)
    for v in p:
        prefactor *= (1 - v) ** m
    phi = {k: sym.coeff(k) for k in range(-(m - 1), m)}
    T = [[phi[j - k] for k in range(m)] for j in range(m)]
    vals = [prefactor] + [prefactor * d for d in _leading_minors(T)]
    if any(v < 0 or v > 1 for v in vals):
        raise PrecisionError("exact Toeplitz evaluation left [0, 1]")
    return vals if exact else [float(v) for v in vals]


def exact_cdf(envr, m: int, h: int, exact: bool = False):
    """P(H <= h) for the m x n matrix with column probabilities ``envr``."""
    if h < 0:
        return Fraction(0) if exact else 0.0
    if h >= m:
        return Fraction(1) if exact else 1.0
    sym = build_symbol(envr, m)
    p = _as_fractions(envr)
    prefactor = Fraction(1)
    for v in p:
        prefactor *= (1 - v) ** m
    if h == 0:
        val = prefactor
    else:
        phi = {k: sym.coeff(k) for k in range(-(h - 1), h)}
        val = prefactor * _det([[phi[j - k] for k in range(h)] for j in range(h)])
    if val < 0 or val > 1:
        raise PrecisionError("exact Toeplitz evaluation left [0, 1]")
    return val if exact else float(val)


# ------------------------------------------------------------- brute force

@lru_cache(maxsize=32)
def pattern_table(m: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Group all 2^(mn) matrices by (column counts, H).

    Returns ``(counts_per_column (G, n), H (G,), multiplicity (G,))``.
    Bit ``j*m + i`` of the pattern index is the entry in row i+1, column j+1.
    """
    if m * n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to m*n <= {BRUTE_FORCE_LIMIT}")
    total = 1 << (m * n)
    chunk = 1 << 18
    base = m + 1
    codes = []
    for start in range(0, total, chunk):
        pat = np.arange(start, min(total, start + chunk), dtype=np.int64)
        best = np.zeros((pat.size, m + 1), dtype=np.int64)
        code = np.zeros(pat.size, dtype=np.int64)
        for j in range(n):
            kj = np.zeros(pat.size, dtype=np.int64)
            for i in range(m):
                e = (pat >> (j * m + i)) & 1
                kj += e
                np.maximum(best[:, i + 1], best[:, i] + e, out=best[:, i + 1])
            code = code * base + kj
        codes.append(code * base + best[:, m])
    uniq, mult = np.unique(np.concatenate(codes), return_counts=True)
    H = uniq % base
    rest = uniq // base
    k = np.empty((uniq.size, n), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        k[:, j] = rest % base
        rest //= base
    return k, H, mult


def _pattern_cdf(col_weight, m: int, n: int, h: int, one):
    """sum over patterns with H <= h of prod_j col_weight(j, k_j)."""
    k, H, mult = pattern_table(m, n)
    total = one * 0
    for row, Hv, c in zip(k, H, mult):
        if Hv > h:
            continue
        term = one * int(c)
        for j, kj in enumerate(row):
            term *= col_weight(j, int(kj))
        total += term
    return total


def brute_force_cdf(envr, m: int, h: int, exact: bool = False):
    """P(H <= h) by enumeration of every matrix (m*n <= 24)."""
    vals = envr.p if isinstance(envr, Environment) else envr
    n = len(vals)
    if m * n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to m*n <= {BRUTE_FORCE_LIMIT}")
    if exact:
        p = [v if isinstance(v, Fraction) else Fraction(float(v)) for v in vals]
        one = Fraction(1)
    else:
        p = [float(v) for v in vals]
        one = 1.0
    return _pattern_cdf(lambda j, kj: p[j] ** kj * (1 - p[j]) ** (m - kj), m, n, h, one)


def annealed_brute_force_cdf(dist: Distribution, m: int, n: int, h: int) -> float:
    """P(H <= h) averaged over i.i.d. p_j ~ F, by enumeration.

    Columns are independent, so each column contributes <p^k (1-p)^(m-k)>.
    """
    mu = []
    for kj in range(m + 1):
        poly = Polynomial([0.0, 1.0]) ** kj * Polynomial([1.0, -1.0]) ** (m - kj)
        mu.append(dist.moment(poly.coef, 1.0, 0))
    return float(_pattern_cdf(lambda j, kj: mu[kj], m, n, h, 1.0))
