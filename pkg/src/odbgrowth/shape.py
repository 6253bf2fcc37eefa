"""Annealed limit constants: time constant, Gaussian variance, limit shapes.

Regimes in the aspect ratio alpha = n/m, with (alpha_c', alpha_c) from
:func:`odbgrowth.env.critical_alphas`:

* ``composite``      alpha < alpha_c'
* ``pure``           alpha_c' < alpha < alpha_c
* ``deterministic``  alpha > alpha_c (and every alpha when b = 1)
* ``boundary``       alpha equal to either critical value
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from .env import Distribution, critical_alphas
from .errors import RegimeError

COMPOSITE = "composite"
PURE = "pure"
DETERMINISTIC = "deterministic"
BOUNDARY = "boundary"


# ------------------------------------------------------- homogeneous case

def homogeneous_constant(alpha: float, x: float) -> float:
    """Time constant for the one-atom environment p = x."""
    if not 0.0 < x < 1.0 or alpha <= 0:
        raise ValueError("need 0 < x < 1 and alpha > 0")
    if (1.0 - x) / x > alpha:
        return 2.0 * math.sqrt(alpha) * math.sqrt(x * (1.0 - x)) + (1.0 - alpha) * x
    return 1.0


def zeta(y: float, x: float) -> float:
    """y * c(1/y, x), extended to y = 0 and x = 0 by continuity."""
    if y < 0 or not 0.0 <= x < 1.0:
        raise ValueError("need y >= 0 and 0 <= x < 1")
    if x / (1.0 - x) >= y:
        return y
    return 2.0 * math.sqrt(y) * math.sqrt(x * (1.0 - x)) + (y - 1.0) * x


def zeta_y(y: float, x: float) -> float:
    """Partial derivative of :func:`zeta` in y."""
    if y < 0 or not 0.0 <= x < 1.0:
        raise ValueError("need y >= 0 and 0 <= x < 1")
    if x / (1.0 - x) >= y:
        return 1.0
    return math.sqrt(x * (1.0 - x) / y) + x


# ------------------------------------------------------ annealed constants

def _pure_moment(dist: Distribution, a: float) -> float:
    """<p(1-p)/(a-p)^2>."""
    return dist.moment([0.0, 1.0, -1.0], a, 2)


def classify(alpha: float, dist: Distribution) -> str:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if dist.b >= 1.0:
        return DETERMINISTIC
    alpha_c, alpha_cp = critical_alphas(dist)
    if alpha == alpha_c or alpha == alpha_cp:
        return BOUNDARY
    if alpha > alpha_c:
        return DETERMINISTIC
    if alpha < alpha_cp:
        return COMPOSITE
    return PURE


def solve_a(alpha: float, dist: Distribution) -> tuple[float, float]:
    """Root a in (b, 1] of alpha * <p(1-p)/(a-p)^2> = 1, with its residual."""
    if dist.b >= 1.0:
        raise RegimeError("theorems require b<1")
    alpha_c, alpha_cp = critical_alphas(dist)
    if not alpha_cp < alpha < alpha_c:
        raise RegimeError(f"alpha={alpha} outside the pure window ({alpha_cp}, {alpha_c})")
    b = dist.b

    def f(a):
        return alpha * _pure_moment(dist, a) - 1.0

    # the moment decreases in a; walk the left end toward b until f > 0
    d = 0.5 * (1.0 - b)
    while True:
        lo = b + d
        if lo == b:
            return b, abs(f(b))
        if f(lo) > 0:
            break
        d *= 0.5
    if f(1.0) >= 0:
        return 1.0, abs(f(1.0))
    a = optimize.brentq(f, lo, 1.0, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    return a, abs(f(a))


@dataclass(frozen=True)
class ShapeConstants:
    alpha: float
    regime: str
    c: float
    a: float | None = None
    tau2: float | None = None
    residual: float = 0.0
    alpha_c: float = math.inf
    alpha_cp: float = 0.0


def time_constant(alpha: float, dist: Distribution) -> ShapeConstants:
    """c(alpha, F) with regime label; tau^2 filled in on the pure window."""
    regime = classify(alpha, dist)
    b = dist.b
    if b >= 1.0:
        return ShapeConstants(alpha, DETERMINISTIC, 1.0, tau2=0.0)
    alpha_c, alpha_cp = critical_alphas(dist)
    common = dict(alpha_c=alpha_c, alpha_cp=alpha_cp)
    if regime == DETERMINISTIC or (regime == BOUNDARY and alpha == alpha_c):
        tau2 = 0.0 if regime == DETERMINISTIC else None
        return ShapeConstants(alpha, regime, 1.0, a=1.0, tau2=tau2, **common)
    if regime in (COMPOSITE, BOUNDARY):
        m = dist.moment([0.0, 1.0], b, 1)
        assert math.isfinite(m), "composite moment must be finite when alpha_c' > 0"
        c = b + alpha * (1.0 - b) * m
        return ShapeConstants(alpha, regime, c, a=b if regime == BOUNDARY else None, **common)
    a, res = solve_a(alpha, dist)
    c = a + alpha * (1.0 - a) * dist.moment([0.0, 1.0], a, 1)
    return ShapeConstants(alpha, PURE, c, a=a, tau2=_variance_at(dist, a), residual=res,
                          **common)


def _variance_at(dist: Distribution, a: float) -> float:
    m1 = dist.moment([0.0, 1.0], a, 1)
    m2 = dist.moment([0.0, 0.0, 1.0], a, 2)
    return max((1.0 - a) ** 2 * (m2 - m1 * m1), 0.0)


def annealed_variance(alpha: float, dist: Distribution, form: str = "moment") -> float:
    """tau^2 = Var((1-a) p / (a-p)) on the pure window.

    ``form="odds"`` evaluates Var(r u0 / (1 + r u0)) with u0 = (a-1)/a by
    generic quadrature instead of the closed-form moments.
    """
    if classify(alpha, dist) != PURE:
        raise RegimeError("annealed variance is defined only on the pure window")
    a, _ = solve_a(alpha, dist)
    if form == "moment":
        return _variance_at(dist, a)
    if form != "odds":
        raise ValueError(f"unknown form {form!r}")
    u0 = (a - 1.0) / a

    def w(p):
        r = p / (1.0 - p)
        return r * u0 / (1.0 + r * u0)

    m1 = dist.expectation(w)
    m2 = dist.expectation(lambda p: w(p) ** 2)
    return max(m2 - m1 * m1, 0.0)


# ------------------------------------------------------------ x/t picture

def alpha_of_ratio(rho: float) -> float:
    return rho / (1.0 - rho)


def regime_windows(dist: Distribution) -> tuple[float, float]:
    """Pure window (alpha_c', alpha_c) mapped to rho = alpha / (1 + alpha)."""
    alpha_c, alpha_cp = critical_alphas(dist)
    hi = 1.0 if math.isinf(alpha_c) else alpha_c / (1.0 + alpha_c)
    return alpha_cp / (1.0 + alpha_cp), hi


@dataclass(frozen=True)
class ShapePoint:
    ratio: float
    c1: float
    c2: float | None
    regime: str


def shape_curves(dist: Distribution, ratios: Sequence[float]) -> list[ShapePoint]:
    """Limit height c1 = (1-rho) c and variance rate c2 = (1-rho) alpha tau^2."""
    out = []
    for rho in ratios:
        if not 0.0 < rho < 1.0:
            raise ValueError("ratios must lie in (0, 1)")
        alpha = alpha_of_ratio(rho)
        sc = time_constant(alpha, dist)
        c2 = (1.0 - rho) * alpha * sc.tau2 if sc.regime == PURE else None
        out.append(ShapePoint(float(rho), (1.0 - rho) * sc.c, c2, sc.regime))
    return out


def write_shape_csv(points: Sequence[ShapePoint], path_or_file) -> None:
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ratio", "c1", "c2", "regime"])
        for pt in points:
            w.writerow([repr(pt.ratio), repr(pt.c1), "" if pt.c2 is None else repr(pt.c2),
                        pt.regime])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)


# -------------------------------------------------------- optimal profile

def profile_g(x, a: float):
    """Maximizing slope g(x) = x(1-x)/(a-x)^2."""
    x = np.asarray(x, dtype=float)
    return x * (1.0 - x) / (a - x) ** 2


@dataclass(frozen=True)
class OptimalProfile:
    alpha: float
    a: float
    x: np.ndarray
    g: np.ndarray
    v: np.ndarray          # alpha * F(x)
    psi: np.ndarray        # psi(v) = int_0^v g(F^{-1}(u/alpha)) du
    functional: float      # int zeta(g(x), x) alpha dF(x)
    normalization: float   # alpha <g> - 1


def _partial_expectation(dist: Distribution, f, upper: float) -> float:
    """<f(p); p <= upper>."""
    atoms = dist.atoms()
    if atoms is not None:
        v, w = atoms
        keep = (w > 0) & (v <= upper)
        return float(sum(wi * f(vi) for vi, wi in zip(v[keep], w[keep])))
    top = min(upper, dist.b)
    if top <= dist.lo:
        return 0.0
    val, _ = integrate.quad(lambda s: f(s) * dist.density(s), dist.lo, top,
                            epsabs=0.0, epsrel=1e-12, limit=200)
    return float(val)


def optimal_profile(alpha: float, dist: Distribution, grid: Sequence[float]) -> OptimalProfile:
    """Slope profile g on ``grid`` (points of [0, b]) and the cumulative psi."""
    if classify(alpha, dist) != PURE:
        raise RegimeError("the optimal profile is computed on the pure window only")
    a, _ = solve_a(alpha, dist)
    x = np.asarray(grid, dtype=float)
    if np.any(x < 0) or np.any(x > dist.b):
        raise ValueError("grid must lie in [0, b]")

    def g1(p):
        return p * (1.0 - p) / (a - p) ** 2

    psi = np.array([alpha * _partial_expectation(dist, g1, xi) for xi in x])
    v = alpha * np.asarray(dist.cdf(x), dtype=float)
    functional = alpha * dist.expectation(lambda p: zeta(g1(p), p))
    norm = alpha * dist.moment([0.0, 1.0, -1.0], a, 2) - 1.0
    return OptimalProfile(alpha, a, x, profile_g(x, a), v, psi, functional, norm)
