"""Tracy-Widom F2 from two independent representations.

* Fredholm determinant of the Airy kernel on (s, inf), discretized by
  Gauss-Legendre Nystrom on the map z = s + L t/(1-t).
* Hastings-McLeod solution of q'' = s q + 2 q^3, integrated backward from
  s0 = 8 with RK4; log F2(s) = -int_s^inf (x - s) q(x)^2 dx.

Airy values come from a Maclaurin series accumulated in double-double
arithmetic on [-10, 8] and from asymptotic expansions outside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from functools import lru_cache

import numpy as np
from numba import njit
from scipy.interpolate import PchipInterpolator

from .errors import PrecisionError

AIRY_RANGE = (-20.0, 40.0)
SERIES_RANGE = (-10.0, 8.0)
PAINLEVE_START = 8.0

_AI0 = "0.355028053887817239260063186004183176397979174199"
_MAI1 = "0.258819403792806798405183560189203963479091138354934582"  # -Ai'(0)


def _dd(text: str) -> tuple[float, float]:
    hi = float(text)
    return hi, float(Decimal(text) - Decimal(hi))


_C1_HI, _C1_LO = _dd(_AI0)
_C2_HI, _C2_LO = _dd(_MAI1)


# --------------------------------------------------- double-double kernels

@njit(inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(inline="always")
def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit(inline="always")
def _split(a):
    t = 134217729.0 * a
    hi = t - (t - a)
    return hi, a - hi


@njit(inline="always")
def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(inline="always")
def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    e += al + bl
    return _quick_two_sum(s, e)


@njit(inline="always")
def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e += ah * bl + al * bh
    return _quick_two_sum(p, e)


@njit(inline="always")
def _dd_div_d(ah, al, b):
    q1 = ah / b
    p1, p2 = _two_prod(q1, b)
    s, e = _two_sum(ah, -p1)
    e -= p2
    e += al
    q2 = (s + e) / b
    return _quick_two_sum(q1, q2)


@njit(cache=True)
def _series(x, c1h, c1l, c2h, c2l):
    # Ai = c1 f - c2 g,  Ai' = c1 f' - c2 g'
    x2h, x2l = _two_prod(x, x)
    x3h, x3l = _dd_mul(x2h, x2l, x, 0.0)
    fh, fl = 1.0, 0.0          # sum f
    gh, gl = x, 0.0            # sum g
    dh, dl = 0.0, 0.0          # sum f'
    eh, el = 1.0, 0.0          # sum g'
    ah, al = 1.0, 0.0          # f term
    bh, bl = x, 0.0            # g term
    th, tl = 0.5 * x2h, 0.5 * x2l  # f' term, k = 1
    uh, ul = 1.0, 0.0          # g' term
    dh, dl = th, tl
    for k in range(0, 200):
        ah, al = _dd_mul(ah, al, x3h, x3l)
        ah, al = _dd_div_d(ah, al, float((3 * k + 2) * (3 * k + 3)))
        bh, bl = _dd_mul(bh, bl, x3h, x3l)
        bh, bl = _dd_div_d(bh, bl, float((3 * k + 3) * (3 * k + 4)))
        uh, ul = _dd_mul(uh, ul, x3h, x3l)
        uh, ul = _dd_div_d(uh, ul, float((3 * k + 1) * (3 * k + 3)))
        fh, fl = _dd_add(fh, fl, ah, al)
        gh, gl = _dd_add(gh, gl, bh, bl)
        eh, el = _dd_add(eh, el, uh, ul)
        kk = k + 1
        th, tl = _dd_mul(th, tl, x3h, x3l)
        th, tl = _dd_div_d(th, tl, float((3 * kk) * (3 * kk + 2)))
        dh, dl = _dd_add(dh, dl, th, tl)
        if (abs(ah) + abs(bh) + abs(th) + abs(uh)) < 1e-34 and k > 2:
            break
    p1h, p1l = _dd_mul(c1h, c1l, fh, fl)
    p2h, p2l = _dd_mul(c2h, c2l, gh, gl)
    aih, ail = _dd_add(p1h, p1l, -p2h, -p2l)
    q1h, q1l = _dd_mul(c1h, c1l, dh, dl)
    q2h, q2l = _dd_mul(c2h, c2l, eh, el)
    aph, apl = _dd_add(q1h, q1l, -q2h, -q2l)
    return aih + ail, aph + apl


@njit(cache=True)
def _asym_coeffs(n):
    u = np.empty(n)
    v = np.empty(n)
    u[0] = 1.0
    v[0] = 1.0
    for k in range(1, n):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v[k] = -(6 * k + 1) / (6 * k - 1) * u[k]
    return u, v


_U, _V = _asym_coeffs(40)


@njit(cache=True)
def _asym_right(x, U, V):
    z = 2.0 / 3.0 * x ** 1.5
    su = 0.0
    sv = 0.0
    t = 1.0
    last = np.inf
    for k in range(U.size):
        tu = U[k] * t
        if abs(tu) > last:
            break
        last = abs(tu)
        su += tu
        sv += V[k] * t
        t *= -1.0 / z
        if last < 1e-17:
            break
    pref = math.exp(-z) / (2.0 * math.sqrt(math.pi))
    return pref * su / x ** 0.25, -pref * sv * x ** 0.25


@njit(cache=True)
def _asym_left(x, U, V):
    y = -x
    z = 2.0 / 3.0 * y ** 1.5
    pe = 0.0
    po = 0.0
    qe = 0.0
    qo = 0.0
    t = 1.0
    for k in range(U.size):
        sgn = 1.0 if (k // 2) % 2 == 0 else -1.0
        if k % 2 == 0:
            pe += sgn * U[k] * t
            qe += sgn * V[k] * t
        else:
            po += sgn * U[k] * t
            qo += sgn * V[k] * t
        t /= z
        if abs(U[k] * t) < 1e-17:
            break
    ang = z - math.pi / 4.0
    c = math.cos(ang)
    s = math.sin(ang)
    ai = (c * pe + s * po) / (math.sqrt(math.pi) * y ** 0.25)
    aip = y ** 0.25 * (s * qe - c * qo) / math.sqrt(math.pi)
    return ai, aip


@njit(cache=True)
def _airy_array(xs, c1h, c1l, c2h, c2l, U, V):
    ai = np.empty(xs.size)
    aip = np.empty(xs.size)
    for i in range(xs.size):
        x = xs[i]
        if x > 40.0:
            ai[i] = 0.0
            aip[i] = 0.0
        elif x > 8.0:
            ai[i], aip[i] = _asym_right(x, U, V)
        elif x >= -10.0:
            ai[i], aip[i] = _series(x, c1h, c1l, c2h, c2l)
        else:
            ai[i], aip[i] = _asym_left(x, U, V)
    return ai, aip


def _airy_unchecked(x):
    xs = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)).ravel())
    ai, aip = _airy_array(xs, _C1_HI, _C1_LO, _C2_HI, _C2_LO, _U, _V)
    shape = np.shape(x)
    return ai.reshape(shape), aip.reshape(shape)


def airy(x):
    """(Ai(x), Ai'(x)) for real x in [-20, 40]; accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < AIRY_RANGE[0]) or np.any(arr > AIRY_RANGE[1]) or np.any(np.isnan(arr)):
        raise ValueError(f"airy is implemented on {AIRY_RANGE}")
    ai, aip = _airy_unchecked(arr)
    if np.ndim(x) == 0:
        return float(ai), float(aip)
    return ai, aip


def _kernel_matrix(x, y, ax, apx, ay, apy):
    with np.errstate(divide="ignore", invalid="ignore"):
        K = (np.outer(ax, apy) - np.outer(apx, ay)) / np.subtract.outer(x, y)
    same = np.equal.outer(x, y)
    if np.any(same):
        diag = apx**2 - x * ax**2
        K[same] = np.broadcast_to(diag[:, None], K.shape)[same]
    return K


def airy_kernel(x, y):
    """K(x, y) = (Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y); Ai'(x)^2 - x Ai(x)^2 on the diagonal."""
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    ya = np.atleast_1d(np.asarray(y, dtype=float))
    xb, yb = np.broadcast_arrays(xa, ya)
    ax, apx = airy(xb)
    ay, apy = airy(yb)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = (ax * apy - apx * ay) / (xb - yb)
    diag = xb == yb
    K = np.where(diag, apx**2 - xb * ax**2, K)
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return float(K[0])
    return K


# ----------------------------------------------------------- Fredholm F2

@dataclass(frozen=True)
class QuadratureConfig:
    nodes: int = 60
    scale: float = 10.0      # L in z = s + L t/(1-t)
    target: float = 1e-8     # largest accepted self-estimated error


@lru_cache(maxsize=16)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


def _fredholm(s: float, n: int, scale: float) -> float:
    t, w = _legendre(n)
    z = s + scale * t / (1.0 - t)
    wz = w * scale / (1.0 - t) ** 2
    ai, aip = _airy_unchecked(z)
    K = _kernel_matrix(z, z, ai, aip, ai, aip)
    sw = np.sqrt(wz)
    return float(np.linalg.det(np.eye(n) - sw[:, None] * K * sw[None, :]))


def f2_cdf_with_error(s: float, cfg: QuadratureConfig = QuadratureConfig()) -> tuple[float, float]:
    """F2(s) and the difference against half the nodes."""
    if not -10.0 <= s <= 8.0:
        raise ValueError("f2_cdf is implemented for s in [-10, 8]")
    full = _fredholm(s, cfg.nodes, cfg.scale)
    half = _fredholm(s, max(cfg.nodes // 2, 2), cfg.scale)
    return min(max(full, 0.0), 1.0), abs(full - half)


def f2_cdf(s: float, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    val, err = f2_cdf_with_error(s, cfg)
    if err > cfg.target:
        raise PrecisionError(f"F2({s}) self-estimated error {err:.2e} above {cfg.target:.0e}")
    return val


# ---------------------------------------------------------- Painleve II

@njit(cache=True)
def _pii_rhs(x, y):
    q, dq = y[0], y[1]
    q2 = q * q
    return np.array([dq, x * q + 2.0 * q * q2, -q2, -x * q2])


@njit(cache=True)
def _pii_run(s0, y0, h, stops):
    """RK4 from s0 downward; state (q, q', I, J) recorded at each stop (descending)."""
    out = np.empty((stops.size, 4))
    y = y0.copy()
    x = s0
    j = 0
    nsteps = int(round((s0 - stops[-1]) / h))
    for k in range(nsteps + 1):
        while j < stops.size and abs(x - stops[j]) < 0.5 * h:
            out[j] = y
            j += 1
        if k == nsteps:
            break
        k1 = _pii_rhs(x, y)
        k2 = _pii_rhs(x - 0.5 * h, y - 0.5 * h * k1)
        k3 = _pii_rhs(x - 0.5 * h, y - 0.5 * h * k2)
        k4 = _pii_rhs(x - h, y - h * k3)
        y = y - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        x = s0 - (k + 1) * h
        if not np.isfinite(y[0]) or abs(y[0]) > 1e6:
            return out, j
    return out, j


def _painleve_states(stops: np.ndarray, h: float) -> np.ndarray:
    ai, aip = _airy_unchecked(PAINLEVE_START)
    ai, aip = float(ai), float(aip)
    tail = aip * aip - PAINLEVE_START * ai * ai   # int_{s0}^inf Ai^2
    y0 = np.array([ai, aip, tail, PAINLEVE_START * tail])
    out, done = _pii_run(PAINLEVE_START, y0, h, stops)
    if done < stops.size:
        raise PrecisionError("Painleve integration blew up (left the Hastings-McLeod branch)")
    return out


@dataclass(frozen=True)
class PainleveResult:
    s: np.ndarray
    f2: np.ndarray
    q: np.ndarray
    error: np.ndarray        # |F(h) - F(h/2)| estimate


def painleve_table(s_values, h: float = 1e-3) -> PainleveResult:
    """F2 at each s via one backward sweep; h must divide the grid spacing from 8."""
    s = np.asarray(s_values, dtype=float)
    if np.any(s < -10.0) or np.any(s > PAINLEVE_START):
        raise ValueError("painleve route is implemented for s in [-10, 8]")
    order = np.argsort(-s, kind="stable")
    stops = s[order]
    # snap stops to the step grid so that recording happens exactly on a node
    snapped = PAINLEVE_START - np.round((PAINLEVE_START - stops) / (0.5 * h)) * (0.5 * h)
    if np.max(np.abs(snapped - stops)) > 1e-9:
        raise ValueError("s values must lie on the grid 8 - k*h/2")

    def logf(hh):
        st = _painleve_states(snapped, hh)
        return -(st[:, 3] - snapped * st[:, 2]), st[:, 0]

    coarse, _ = logf(h)
    fine, q = logf(0.5 * h)
    f_fine = np.exp(fine)
    err = np.abs(np.exp(coarse) - f_fine)
    back = np.empty_like(order)
    back[order] = np.arange(order.size)
    return PainleveResult(s, f_fine[back], q[back], err[back])


def f2_painleve(s: float, h: float = 1e-3, target: float = 1e-8) -> float:
    res = painleve_table([s], h)
    if res.error[0] > target:
        raise PrecisionError(f"Painleve step-halving error {res.error[0]:.2e} above {target:.0e}")
    return float(res.f2[0])


# ------------------------------------------------------------ CDF tables

class F2Table:
    """Monotone interpolant of F2 on a grid, for bulk CDF evaluation."""

    def __init__(self, lo: float = -10.0, hi: float = 8.0, step: float = 0.02,
                 cfg: QuadratureConfig = QuadratureConfig()):
        self.grid = np.arange(lo, hi + 0.5 * step, step)
        vals = np.array([f2_cdf(float(s), cfg) for s in self.grid])
        self.values = np.maximum.accumulate(vals)
        self._interp = PchipInterpolator(self.grid, self.values, extrapolate=False)
        self.lo, self.hi = lo, hi

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = self._interp(np.clip(s, self.lo, self.hi))
        out = np.where(s < self.lo, 0.0, out)
        out = np.where(s > self.hi, 1.0, out)
        return out if out.ndim else float(out)


@lru_cache(maxsize=1)
def default_f2_table() -> F2Table:
    return F2Table()
