"""Quenched saddle-point constants for a frozen environment.

For odds r_j and aspect ratio alpha the saddle u in (u_bar, 0) solves

    (alpha/n) sum r/(1+ru)^2 = 1/(u-1)^2,

and fixes the centering c, the third derivative sigma''' and the
Tracy-Widom scale g.  All sums run over the sorted odds so results are
bit-identical under any permutation of the environment.
"""
from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from . import rng
from .env import Distribution, Environment, sample_environment
from .errors import FeasibilityError, RegimeError
from .shape import PURE, classify, solve_a, time_constant

BISECTION_STEPS = 200


@njit(cache=True)
def _neumaier(vals):
    s = 0.0
    comp = 0.0
    for v in vals:
        t = s + v
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
    return s + comp


@njit(cache=True)
def _lhs(r, u):
    return _neumaier(r / (1.0 + r * u) ** 2)


@njit(cache=True)
def _bisect(r, scale, lo, hi, steps):
    # f = scale * sum r/(1+ru)^2 - 1/(u-1)^2 is decreasing on (lo, hi)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        f = scale * _lhs(r, mid) - 1.0 / (mid - 1.0) ** 2
        if f > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _odds(envr) -> np.ndarray:
    if isinstance(envr, Environment):
        r = envr.r
    else:
        p = np.asarray(envr, dtype=float)
        if np.any(p < 0) or np.any(p >= 1):
            raise ValueError("probabilities must lie in [0, 1)")
        r = p / (1.0 - p)
    return np.sort(np.ascontiguousarray(r, dtype=float))


def solve_u(envr, alpha: float) -> tuple[float, float]:
    """Saddle u of the frozen environment and the residual of its equation."""
    return _solve_sorted(_odds(envr), alpha)


def _solve_sorted(r: np.ndarray, alpha: float) -> tuple[float, float]:
    n = r.size
    if r[-1] <= 0.0:
        raise FeasibilityError("trivial environment: every r_j is zero")
    scale = alpha / n
    load = scale * _neumaier(r)
    if load >= 1.0:
        raise FeasibilityError(
            f"quenched-deterministic sample: (alpha/n) sum r_j = {load:.6g} >= 1")
    u_bar = -1.0 / r[-1]
    u = _bisect(r, scale, u_bar, 0.0, BISECTION_STEPS)
    rhs = 1.0 / (u - 1.0) ** 2
    return u, abs(scale * _lhs(r, u) - rhs) / rhs


@dataclass(frozen=True)
class QuenchedConstants:
    alpha: float
    n: int
    u: float
    c: float
    sigma3: float
    g: float
    u_bar: float
    residual: float          # relative residual of the saddle equation
    sigma1_residual: float   # |sigma'(u)| with c plugged in

    def centering(self, m: int) -> float:
        """G_n = c * m."""
        return self.c * m


def _constants_from_u(r: np.ndarray, alpha: float, u: float):
    n = r.size
    s = alpha / n
    d = 1.0 + r * u
    c = 1.0 / (1.0 - u) - s * _neumaier(r * u / d)
    sigma3 = (-2.0 * s * _neumaier(r * r / d**3) + 2.0 / (u - 1.0) ** 3) / u
    g = (0.5 * sigma3) ** (-1.0 / 3.0) / abs(u)
    sigma1 = s * _neumaier(r / d) + 1.0 / (u - 1.0) + (c - 1.0) / u
    return c, sigma3, g, abs(sigma1)


def quenched_constants(envr, alpha: float) -> QuenchedConstants:
    r = _odds(envr)
    u, res = _solve_sorted(r, alpha)
    c, sigma3, g, s1 = _constants_from_u(r, alpha, u)
    return QuenchedConstants(alpha, r.size, u, c, sigma3, g, float(-1.0 / r[-1]), res, s1)


# ------------------------------------------------------ population limits

@dataclass(frozen=True)
class PopulationConstants:
    alpha: float
    u0: float
    c0: float
    sigma3: float
    g0: float
    xi: float                # 1 - 1/b, left end of the saddle interval
    a: float                 # 1/(1 - u0)
    residual: float
    a_check: float           # |u0 - (a-1)/a| against the annealed root a
    c_check: float           # |c0 - c(alpha, F)|


def _pop_lhs(dist: Distribution, alpha: float, u: float) -> float:
    # <r/(1+ru)^2> = <p(1-p)/(A-p)^2> / (1-u)^2 with A = 1/(1-u)
    A = 1.0 / (1.0 - u)
    return alpha * dist.moment([0.0, 1.0, -1.0], A, 2) / (1.0 - u) ** 2


def population_constants(alpha: float, dist: Distribution) -> PopulationConstants:
    if classify(alpha, dist) != PURE:
        raise RegimeError("population saddle exists only on the pure window")
    b = dist.b
    xi = 1.0 - 1.0 / b
    lo, hi = xi, 0.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _pop_lhs(dist, alpha, mid) - 1.0 / (mid - 1.0) ** 2 > 0:
            lo = mid
        else:
            hi = mid
    u = 0.5 * (lo + hi)
    rhs = 1.0 / (u - 1.0) ** 2
    res = abs(_pop_lhs(dist, alpha, u) - rhs) / rhs
    A = 1.0 / (1.0 - u)
    # <ru/(1+ru)> = u <p/(A-p)> / (1-u);  <r^2/(1+ru)^3> = <p^2(1-p)/(A-p)^3> / (1-u)^3
    c0 = A - alpha * u * dist.moment([0.0, 1.0], A, 1) / (1.0 - u)
    m3 = dist.moment([0.0, 0.0, 1.0, -1.0], A, 3) / (1.0 - u) ** 3
    sigma3 = (-2.0 * alpha * m3 + 2.0 / (u - 1.0) ** 3) / u
    g0 = (0.5 * sigma3) ** (-1.0 / 3.0) / abs(u)
    a, _ = solve_a(alpha, dist)
    c_thm = time_constant(alpha, dist).c
    return PopulationConstants(alpha, u, c0, sigma3, g0, xi, A, res,
                               abs(u - (a - 1.0) / a), abs(c0 - c_thm))


# ---------------------------------------------------------------- probes

@dataclass
class ProbeRow:
    n: int
    c_n: list = field(default_factory=list)
    g_n: list = field(default_factory=list)
    infeasible: int = 0

    def median_dev(self, c0: float, g0: float) -> tuple[float, float]:
        if not self.c_n:
            return math.nan, math.nan
        return (float(np.median(np.abs(np.asarray(self.c_n) - c0))),
                float(np.median(np.abs(np.asarray(self.g_n) - g0))))


def convergence_probe(dist: Distribution, alpha: float, ns: Sequence[int], seed: int,
                      samples: int = 20) -> tuple[PopulationConstants, list[ProbeRow]]:
    """Quenched constants on ``samples`` sampled environments for each n."""
    pop = population_constants(alpha, dist)
    rows = []
    for n in ns:
        row = ProbeRow(int(n))
        for k in range(samples):
            env = sample_environment(dist, int(n), rng.derive_seed(seed, int(n), k))
            try:
                qc = quenched_constants(env, alpha)
            except FeasibilityError:
                row.infeasible += 1
                continue
            row.c_n.append(qc.c)
            row.g_n.append(qc.g)
        rows.append(row)
    return pop, rows


# ---------------------------------------------------- complex diagnostics

def sigma_eval(envr, alpha: float, c: float, z: complex,
               cut_distance: float = 1e-12) -> tuple[complex, complex]:
    """(sigma(z), sigma'(z)) on principal branches.

    A real z in (u_bar, 0) is read from the upper side of the cut.
    """
    r = _odds(envr)
    n = r.size
    z = complex(z)
    if z.imag == 0.0:
        z = complex(z.real, 0.0)
        pos = r[r > 0]
        u_bar = -1.0 / pos[-1] if pos.size else -math.inf
        if z.real <= u_bar + cut_distance:
            raise ValueError("z lies on the branch cut (-inf, u_bar]")
    if abs(z) < cut_distance or abs(z - 1.0) < cut_distance:
        raise ValueError("z too close to a branch point")
    s = alpha / n
    w = 1.0 + r * z
    sig = s * _csum(np.log(w)) + cmath.log(z - 1.0) + (c - 1.0) * cmath.log(z)
    dsig = s * _csum(r / w) + 1.0 / (z - 1.0) + (c - 1.0) / z
    return sig, dsig


def _csum(v: np.ndarray) -> complex:
    return complex(_neumaier(np.ascontiguousarray(v.real)),
                   _neumaier(np.ascontiguousarray(v.imag)))


@dataclass(frozen=True)
class SteepestCurves:
    plus: np.ndarray         # upper half of C+, starting at u
    minus: np.ndarray        # upper half of C-, starting at u
    im_target: float
    max_drift: float         # max |Im sigma - im_target| over both curves
    plus_end_distance: float # |z_end - 1| for C+
    minus_end_arg: float     # arg of the last C- point
    minus_limit_arg: float   # c pi / (c + alpha (1 - nu))

    def polylines(self) -> dict[str, np.ndarray]:
        """Full curves: lower half (conjugated, reversed) then upper half."""
        return {name: np.concatenate([np.conj(h[::-1]), h[1:]])
                for name, h in (("C+", self.plus), ("C-", self.minus))}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "branch"])
            for name, pts in self.polylines().items():
                for z in pts:
                    w.writerow([repr(float(z.real)), repr(float(z.imag)), name])


def trace_steepest_curves(envr, alpha: float, max_arclength: float = 20.0,
                          step: float = 1e-3) -> SteepestCurves:
    """Follow the constant-phase curves leaving the saddle into the upper half plane."""
    qc = quenched_constants(envr, alpha)
    u, c = qc.u, qc.c
    target = c * math.pi

    def walk(theta: float, sign: float) -> tuple[np.ndarray, float]:
        # sign = -1: Re sigma decreasing (C+); +1: increasing (C-)
        pts = [complex(u, 0.0)]
        z = u + step * cmath.exp(1j * theta)
        drift = 0.0
        s = step
        while s < max_arclength:
            sig, d = sigma_eval(envr, alpha, c, z)
            # project back onto Im sigma = target along grad Im sigma = i conj(sigma')
            err = sig.imag - target
            z = z - err * 1j * d.conjugate() / abs(d) ** 2
            sig, d = sigma_eval(envr, alpha, c, z)
            drift = max(drift, abs(sig.imag - target))
            pts.append(z)
            if sign < 0 and abs(z - 1.0) < 2 * step:
                break
            if z.imag <= 0:
                raise ArithmeticError("curve left the upper half plane")
            z = z + sign * step * d.conjugate() / abs(d)
            s += step
        return np.asarray(pts), drift

    plus, d1 = walk(math.pi / 3, -1.0)
    minus, d2 = walk(2 * math.pi / 3, 1.0)
    r = _odds(envr)
    nu = float(np.mean(r == 0.0))
    return SteepestCurves(plus, minus, target, max(d1, d2), float(abs(plus[-1] - 1.0)),
                          float(np.angle(minus[-1])), c * math.pi / (c + alpha * (1.0 - nu)))
