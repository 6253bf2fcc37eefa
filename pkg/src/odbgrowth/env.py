"""Environment laws F on [0, 1] and realised environments p_1..p_n.

A distribution knows its support edge ``b``, its CDF and quantile, and can
integrate functions against dF.  Integrands of the form
``poly(p) / (pole - p)**power`` (every moment the shape and saddle point
formulas need) have exact closed forms on the atomic and polynomial-density
families; anything else goes through adaptive quadrature with dyadic
refinement toward ``b`` so that divergent moments are reported as ``inf``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate

from . import rng
from .errors import RegimeError

# divergence detection for generic quadrature
DIVERGENCE_CAP = 1e12
MAX_DYADIC_LEVELS = 60


class ExpectationError(ArithmeticError):
    """Quadrature failed for a reason other than divergence at the edge."""


class Distribution:
    """Base class; concrete families are frozen dataclasses below."""

    family: str = ""
    tolerance: float = 1e-10

    # -- interface ---------------------------------------------------
    @property
    def b(self) -> float:
        raise NotImplementedError

    @property
    def lo(self) -> float:
        """Left end of the support."""
        raise NotImplementedError

    def cdf(self, s):
        raise NotImplementedError

    def quantile(self, v):
        raise NotImplementedError

    def params(self) -> list:
        raise NotImplementedError

    # atomic families override
    def atoms(self) -> tuple[np.ndarray, np.ndarray] | None:
        return None

    # polynomial-density families override: density as a polynomial in
    # w = b - s on [lo, b]
    def edge_density(self) -> Polynomial | None:
        return None

    def density(self, s):
        raise NotImplementedError

    # -- services ----------------------------------------------------
    def to_json(self) -> str:
        return json.dumps({"family": self.family, "params": self.params(),
                           "tolerance": self.tolerance})

    def expectation(self, f: Callable) -> float:
        return expectation(self, f)

    def moment(self, num: Sequence[float], pole: float, power: int) -> float:
        return rational_moment(self, num, pole, power)


@dataclass(frozen=True)
class PointMass(Distribution):
    x: float
    tolerance: float = 1e-10
    family: str = field(default="point", init=False, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.x <= 1.0:
            raise ValueError("point mass must lie in [0, 1]")

    @property
    def b(self):
        return float(self.x)

    @property
    def lo(self):
        return float(self.x)

    def cdf(self, s):
        return np.where(np.asarray(s) >= self.x, 1.0, 0.0)

    def quantile(self, v):
        return np.full(np.shape(v), float(self.x)) if np.ndim(v) else float(self.x)

    def params(self):
        return [self.x]

    def atoms(self):
        return np.array([float(self.x)]), np.array([1.0])


@dataclass(frozen=True)
class Uniform(Distribution):
    low: float
    high: float
    tolerance: float = 1e-10
    family: str = field(default="uniform", init=False, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.low < self.high <= 1.0:
            raise ValueError("need 0 <= low < high <= 1")

    @property
    def b(self):
        return float(self.high)

    @property
    def lo(self):
        return float(self.low)

    def cdf(self, s):
        return np.clip((np.asarray(s, dtype=float) - self.low) / (self.high - self.low), 0.0, 1.0)

    def quantile(self, v):
        return self.low + (self.high - self.low) * np.asarray(v, dtype=float)

    def density(self, s):
        s = np.asarray(s, dtype=float)
        return np.where((s >= self.low) & (s <= self.high), 1.0 / (self.high - self.low), 0.0)

    def edge_density(self):
        return Polynomial([1.0 / (self.high - self.low)])

    def params(self):
        return [self.low, self.high]


@dataclass(frozen=True)
class PolyEdge(Distribution):
    """F(s) = 1 - (1 - s/b)**k on [0, b]."""

    edge: float
    k: float
    tolerance: float = 1e-10
    family: str = field(default="poly", init=False, repr=False)

    def __post_init__(self):
        if not 0.0 < self.edge <= 1.0 or self.k <= 0:
            raise ValueError("need 0 < b <= 1 and k > 0")

    @property
    def b(self):
        return float(self.edge)

    @property
    def lo(self):
        return 0.0

    def cdf(self, s):
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.edge)
        return 1.0 - (1.0 - s / self.edge) ** self.k

    def quantile(self, v):
        v = np.asarray(v, dtype=float)
        return self.edge * (1.0 - (1.0 - v) ** (1.0 / self.k))

    def density(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s >= 0) & (s < self.edge)
        w = np.where(inside, 1.0 - s / self.edge, 1.0)
        return np.where(inside, self.k / self.edge * w ** (self.k - 1), 0.0)

    def edge_density(self):
        k = self.k
        if float(k).is_integer():
            k = int(k)
            coef = np.zeros(k)
            coef[k - 1] = k / self.edge**k
            return Polynomial(coef)
        return None

    def params(self):
        return [self.edge, self.k]


@dataclass(frozen=True)
class Discrete(Distribution):
    """Finitely many atoms ``values`` with weights summing to one."""

    values: tuple
    weights: tuple
    tolerance: float = 1e-10
    family: str = field(default="discrete", init=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if v.shape != w.shape or v.size == 0:
            raise ValueError("values and weights must be non-empty and aligned")
        if np.any(v < 0) or np.any(v > 1) or np.any(w < 0):
            raise ValueError("atoms must lie in [0, 1] with nonnegative weights")
        if not math.isclose(w.sum(), 1.0, rel_tol=1e-12):
            raise ValueError("weights must sum to one")
        order = np.argsort(v, kind="stable")
        object.__setattr__(self, "values", tuple(v[order]))
        object.__setattr__(self, "weights", tuple(w[order]))

    @property
    def b(self):
        v, w = self.atoms()
        return float(v[w > 0].max())

    @property
    def lo(self):
        v, w = self.atoms()
        return float(v[w > 0].min())

    def _cum(self):
        return np.cumsum(np.asarray(self.weights, dtype=float))

    def cdf(self, s):
        v = np.asarray(self.values)
        idx = np.searchsorted(v, np.asarray(s, dtype=float), side="right")
        cum = np.concatenate([[0.0], self._cum()])
        return np.minimum(cum[idx], 1.0)

    def quantile(self, v):
        # F^{-1}(v) = sup{y : F(y) < v} = smallest atom with F(atom) >= v
        cum = self._cum()
        cum[-1] = 1.0
        idx = np.searchsorted(cum, np.asarray(v, dtype=float), side="left")
        vals = np.asarray(self.values)
        return vals[np.minimum(idx, len(vals) - 1)]

    def params(self):
        return [list(self.values), list(self.weights)]

    def atoms(self):
        return np.asarray(self.values, dtype=float), np.asarray(self.weights, dtype=float)


class Empirical(Discrete):
    """Equal-weight atoms at observed samples."""

    def __init__(self, samples, tolerance: float = 1e-10):
        s = np.sort(np.asarray(samples, dtype=float))
        w = np.full(s.size, 1.0 / s.size)
        super().__init__(tuple(s), tuple(w), tolerance)
        object.__setattr__(self, "family", "empirical")

    def quantile(self, v):
        s = np.asarray(self.values)
        k = np.ceil(np.asarray(v, dtype=float) * s.size).astype(int) - 1
        return s[np.clip(k, 0, s.size - 1)]

    def params(self):
        return [list(self.values)]


# ---------------------------------------------------------------- parsing

def from_dict(d: dict) -> Distribution:
    fam = d["family"]
    params = d.get("params", [])
    tol = d.get("tolerance", 1e-10)
    if fam == "point":
        return PointMass(float(params[0]), tolerance=tol)
    if fam == "uniform":
        return Uniform(float(params[0]), float(params[1]), tolerance=tol)
    if fam == "poly":
        return PolyEdge(float(params[0]), float(params[1]), tolerance=tol)
    if fam == "discrete":
        return Discrete(tuple(params[0]), tuple(params[1]), tolerance=tol)
    if fam == "empirical":
        return Empirical(params[0], tolerance=tol)
    raise ValueError(f"unknown family {fam!r}")


def parse_dist(text: str) -> Distribution:
    """Parse ``uniform:0,0.5``, ``poly:0.5,3``, ``point:0.25`` or ``file:<path>``.

    A file holds either the JSON object ``{family, params, tolerance}`` or
    whitespace separated samples (an empirical law).
    """
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind == "file":
        raw = Path(rest).read_text()
        try:
            return from_dict(json.loads(raw))
        except json.JSONDecodeError:
            return Empirical([float(t) for t in raw.split()])
    vals = [float(t) for t in rest.split(",") if t.strip()]
    if kind == "uniform":
        return Uniform(*vals)
    if kind == "poly":
        return PolyEdge(*vals)
    if kind == "point":
        return PointMass(*vals)
    raise ValueError(f"cannot parse distribution {text!r}")


# ----------------------------------------------------------- integration

def support_bound(dist: Distribution) -> float:
    """Right edge b = min{s : F(s) = 1}."""
    return dist.b


def rational_moment(dist: Distribution, num: Sequence[float], pole: float, power: int) -> float:
    """<num(p) / (pole - p)**power> with ``num`` given by ascending coefficients.

    The pole must not lie inside the support; a pole at ``b`` yields
    ``inf`` when the moment diverges.
    """
    num_poly = Polynomial(np.asarray(num, dtype=float))
    atoms = dist.atoms()
    if atoms is not None:
        v, w = atoms
        keep = w > 0
        v, w = v[keep], w[keep]
        if np.any(v > pole):
            raise ValueError("pole lies inside the support")
        top = num_poly(v)
        den = pole - v
        total = 0.0
        for t, d, wt in zip(top, den, w):
            if d == 0.0 and power > 0:
                if t != 0.0:
                    return math.inf
                continue
            total += wt * t / d**power
        return float(total)

    dens = dist.edge_density()
    if dens is None:
        return expectation(dist, lambda p: num_poly(p) / (pole - p) ** power)

    b, lo = dist.b, dist.lo
    delta = pole - b
    if delta < 0:
        raise ValueError("pole lies inside the support")
    # in t = pole - p:  b - p = t - delta  and  p = pole - t
    q = num_poly(Polynomial([pole, -1.0])) * dens(Polynomial([-delta, 1.0]))
    c = q.coef
    t_lo, t_hi = delta, pole - lo
    total = 0.0
    for k, ck in enumerate(c):
        if ck == 0.0:
            continue
        e = k - power
        if t_lo == 0.0 and e <= -1:
            return math.inf
        if e == -1:
            total += ck * math.log(t_hi / t_lo)
        else:
            total += ck * (t_hi ** (e + 1) - t_lo ** (e + 1)) / (e + 1)
    return float(total)


def expectation(dist: Distribution, f: Callable) -> float:
    """<f(p)> by exact summation (atoms) or adaptive quadrature.

    For densities the interval is split dyadically toward ``b``.  The sum is
    declared divergent (``inf``) when it exceeds ``DIVERGENCE_CAP`` or when
    the dyadic pieces fail to shrink by the last level.
    """
    atoms = dist.atoms()
    if atoms is not None:
        v, w = atoms
        keep = w > 0
        vals = np.array([f(x) for x in v[keep]], dtype=float)
        if np.any(~np.isfinite(vals)):
            return math.inf
        return float(np.dot(w[keep], vals))

    lo, b = dist.lo, dist.b
    tol = dist.tolerance

    def integrand(s):
        try:
            return f(s) * dist.density(s)
        except (ZeroDivisionError, OverflowError):
            return math.inf

    def piece(x0, x1):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            val, err = integrate.quad(integrand, x0, x1, epsabs=0.0, epsrel=1e-13,
                                      limit=200, full_output=1)[:2]
        return val, err

    width = b - lo
    total, err = piece(lo, b - 0.5 * width)
    if err > max(1e-6, 1e3 * tol) * max(1.0, abs(total)):
        raise ExpectationError("quadrature did not converge on the bulk of the support")
    floor = 1e3 * np.finfo(float).eps * max(b, 1e-300)
    pieces = []
    for level in range(1, MAX_DYADIC_LEVELS):
        x0 = b - width * 0.5**level
        x1 = b - width * 0.5 ** (level + 1)
        if b - x1 < floor:
            break
        val, _ = piece(x0, x1)
        total += val
        pieces.append(val)
        if not math.isfinite(total) or abs(total) > DIVERGENCE_CAP:
            return math.inf
        small = 1e-3 * tol * abs(total)
        if len(pieces) >= 3 and abs(pieces[-1]) <= small and abs(pieces[-2]) <= small:
            return float(total)
    # pieces that stop shrinking geometrically signal a divergent moment
    ratio = abs(pieces[-1]) / abs(pieces[-2]) if pieces[-2] != 0 else 0.0
    if ratio >= 0.99:
        return math.inf
    return float(total + pieces[-1] * ratio / (1.0 - ratio))


def critical_alphas(dist: Distribution) -> tuple[float, float]:
    """(alpha_c, alpha_c') = (<p/(1-p)>^{-1}, <p(1-p)/(b-p)^2>^{-1}).

    ``alpha_c'`` is 0 when its moment diverges; ``alpha_c`` is ``inf`` when
    every p is 0.
    """
    b = dist.b
    if b >= 1.0:
        raise RegimeError("theorems require b<1")
    m1 = dist.moment([0.0, 1.0], 1.0, 1)
    m2 = dist.moment([0.0, 1.0, -1.0], b, 2)
    alpha_c = math.inf if m1 == 0 else 1.0 / m1
    alpha_cp = 0.0 if math.isinf(m2) else (math.inf if m2 == 0 else 1.0 / m2)
    return alpha_c, alpha_cp


def quantile(dist: Distribution, v):
    """F^{-1}(v) = sup{y : F(y) < v}."""
    return dist.quantile(v)


# ------------------------------------------------------------ environment

@dataclass(frozen=True)
class Environment:
    """Column probabilities p_1..p_n (stored 0-based)."""

    p: np.ndarray
    seed: int | None = None
    source: Distribution | None = None

    def __post_init__(self):
        p = np.ascontiguousarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("environment needs a non-empty vector of probabilities")
        if np.any(p < 0) or np.any(p >= 1):
            raise ValueError("probabilities must lie in [0, 1)")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.p.size

    @property
    def r(self) -> np.ndarray:
        return self.p / (1.0 - self.p)

    def head(self, k: int) -> "Environment":
        return Environment(self.p[:k], self.seed, self.source)

    def permuted(self, perm) -> "Environment":
        return Environment(self.p[np.asarray(perm)], self.seed, self.source)

    def save(self, path) -> None:
        np.savetxt(path, self.p, fmt="%.17g")

    @classmethod
    def load(cls, path) -> "Environment":
        return cls(np.atleast_1d(np.loadtxt(path, dtype=float)))


def sample_environment(dist: Distribution, n: int, seed: int) -> Environment:
    """p_j = F^{-1}(c_j) with c_j from the COLUMN stream of ``seed``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    c = rng.column_uniforms(seed, n)
    p = np.asarray(dist.quantile(c), dtype=float)
    if np.any(p >= 1.0):
        raise ValueError("sampled p = 1; distributions with mass at 1 are not supported")
    return Environment(p, seed=seed, source=dist)
