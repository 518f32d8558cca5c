"""Counter-based random numbers keyed by (master seed, replica, domain, site).

Every random quantity in this package is a pure function of a 64-bit key
built from the master seed, the replica index, a domain tag and two integer
coordinates.  There is no generator state: the draw at a lattice site is the
same whether the site is visited first or last, by one worker or many.  That
is what makes ensemble runs bit-reproducible under any scheduling and lets
streaming kernels regenerate a weight instead of storing it.

The key is produced by chaining the splitmix64 finalizer over the input
words.  The finalizer is bijective, so for a fixed (master, replica, domain)
distinct sites can never collide, and as a counter-mode generator the mixer
has no known statistical defects at Monte Carlo precision.

Three domain tags keep independent uses of the same coordinates apart:
lattice weights, Poisson clock gaps, and initial occupancy draws.

Two implementations are kept in sync: numba-jitted scalar functions (used
inside the simulation kernels) and vectorized numpy versions (used when
materializing whole weight windows).  ``tests/test_rng.py`` cross-checks
them bit for bit against a pure-Python reference.
"""

from __future__ import annotations

import numpy as np
from numba import float64, int64, njit, uint64

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15

# Domain tags; distinct uses of the same (i, j) must never share a key.
DOMAIN_WEIGHT = 1
DOMAIN_CLOCK = 2
DOMAIN_OCCUPANCY = 3

_U = np.uint64
_INV_2_53 = 2.0 ** -53


@njit(uint64(uint64), cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _U(30))) * _U(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U(27))) * _U(0x94D049BB133111EB)
    return z ^ (z >> _U(31))


@njit(uint64(uint64, uint64, uint64, int64, int64), cache=True, inline="always")
def site_key(master, replica, domain, i, j):
    h = mix64(master ^ _U(GOLDEN))
    h = mix64(h ^ replica)
    h = mix64(h ^ domain)
    h = mix64(h ^ _U(i))
    return mix64(h ^ _U(j))


@njit(float64(uint64), cache=True, inline="always")
def key_u01(key):
    # 53 high bits, offset by half an ulp: strictly inside (0, 1).
    return (np.float64(key >> _U(11)) + 0.5) * _INV_2_53


@njit(float64(uint64, float64), cache=True, inline="always")
def key_exponential(key, rate):
    # Inversion of the exponential CDF; rate == inf encodes a deterministic
    # zero weight (mean 1/rate == 0).
    return -np.log(key_u01(key)) / rate


@njit(float64(uint64, uint64, uint64, int64, int64, float64), cache=True, inline="always")
def site_exponential(master, replica, domain, i, j, rate):
    return key_exponential(site_key(master, replica, domain, i, j), rate)


def mix64_py(z: int) -> int:
    """Pure-Python reference for :func:`mix64` (wrapping by masking)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def site_key_py(master: int, replica: int, domain: int, i: int, j: int) -> int:
    h = mix64_py((master & MASK64) ^ GOLDEN)
    h = mix64_py(h ^ (replica & MASK64))
    h = mix64_py(h ^ (domain & MASK64))
    h = mix64_py(h ^ (i & MASK64))
    return mix64_py(h ^ (j & MASK64))


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U(30))) * _U(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U(27))) * _U(0x94D049BB133111EB)
    return z ^ (z >> _U(31))


def site_keys_np(master: int, replica: int, domain: int, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    """Vectorized keys for integer coordinate arrays ``ii``, ``jj``."""
    with np.errstate(over="ignore"):
        h0 = _mix64_np(np.asarray((master & MASK64) ^ GOLDEN, dtype=np.uint64))
        h0 = _mix64_np(h0 ^ _U(replica & MASK64))
        h0 = _mix64_np(h0 ^ _U(domain & MASK64))
        h = _mix64_np(h0 ^ ii.astype(np.int64).view(np.uint64))
        return _mix64_np(h ^ jj.astype(np.int64).view(np.uint64))


def keys_u01_np(keys: np.ndarray) -> np.ndarray:
    return ((keys >> _U(11)).astype(np.float64) + 0.5) * _INV_2_53
