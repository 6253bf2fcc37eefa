"""Counter-based random streams.

Every random number used by the package is a pure function of
``(seed, purpose, i, j)``: a SplitMix64 finaliser is applied to a key built
from those integers.  Nothing is drawn sequentially, so

* a matrix entry (i, j) has the same uniform whatever the matrix size,
  which gives the "all m and n simultaneously" construction for free;
* results do not depend on the order in which replicas are processed or on
  how many workers process them.

Purposes
--------
ENTRY   uniforms m_ij deciding matrix entries / coin flips
COLUMN  uniforms c_j mapped to column probabilities p_j = F^{-1}(c_j)
REPLICA per-replica child seeds
RENEWAL streams used by the renewal-walk construction
"""
from __future__ import annotations

import numpy as np
from numba import njit

ENTRY = 1
COLUMN = 2
REPLICA = 3
RENEWAL = 4

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TAG_MULT = 0xD1B54A32D192ED03
_TWO53 = 9007199254740992.0
_INV53 = 1.0 / _TWO53


def _mix_py(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int, purpose: int) -> int:
    """64-bit key of the stream ``purpose`` under ``seed``."""
    s = _mix_py((int(seed) + _GOLDEN) & _MASK)
    return _mix_py(s ^ ((purpose * _TAG_MULT) & _MASK))


def derive_seed(seed: int, *path: int) -> int:
    """Child seed addressed by an integer path, e.g. ``(REPLICA, r)``."""
    z = _mix_py((int(seed) + _GOLDEN) & _MASK)
    for k in path:
        z = _mix_py(z ^ _mix_py(((int(k) + 1) * _GOLDEN) & _MASK))
    return z


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(inline="always")
def _column_key(key, j):
    return _mix(key ^ _mix(np.uint64(j + 1) * np.uint64(_GOLDEN)))


@njit(inline="always")
def _entry_bits(ckey, i):
    # 53 random bits for row i (1-based) of the column keyed by ckey
    return _mix(ckey + np.uint64(i) * np.uint64(_GOLDEN)) >> np.uint64(11)


@njit(inline="always")
def bernoulli_threshold(p):
    """Integer threshold T with ``bits < T`` iff ``bits * 2**-53 < p``."""
    if p >= 1.0:
        return np.uint64(1) << np.uint64(53)
    if p <= 0.0:
        return np.uint64(0)
    return np.uint64(np.ceil(p * _TWO53))


@njit(cache=True, nogil=True)
def _entry_uniforms(key, row0, rows, col0, cols):
    out = np.empty((rows, cols))
    for jj in range(cols):
        ck = _column_key(key, col0 + jj)
        for ii in range(rows):
            out[ii, jj] = _entry_bits(ck, row0 + ii) * _INV53
    return out


@njit(cache=True, nogil=True)
def _column_uniforms(key, col0, cols):
    out = np.empty(cols)
    for jj in range(cols):
        ck = _column_key(key, col0 + jj)
        # offset by half a unit so values lie strictly inside (0, 1)
        out[jj] = (_entry_bits(ck, 0) + 0.5) * _INV53
    return out


def entry_uniforms(seed: int, m: int, n: int, purpose: int = ENTRY,
                   row0: int = 1, col0: int = 0) -> np.ndarray:
    """Uniforms in [0, 1) for rows ``row0..row0+m-1`` and columns ``col0..col0+n-1``.

    Row ``i`` is counted from the bottom of the matrix starting at 1; columns
    are 0-based.  Shape of the result is ``(m, n)``; ``out[0]`` is the bottom row.
    """
    key = np.uint64(stream_key(seed, purpose))
    return _entry_uniforms(key, row0, m, col0, n)


def column_uniforms(seed: int, n: int, purpose: int = COLUMN, col0: int = 0) -> np.ndarray:
    """Uniforms in (0, 1) for columns ``col0..col0+n-1``."""
    key = np.uint64(stream_key(seed, purpose))
    return _column_uniforms(key, col0, n)
