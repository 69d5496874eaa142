"""Counter-based random stream: a pure function of (seed, ell, component).

    u(seed, ell, j) = splitmix64(seed + ell * GOLDEN + j) >> 11, scaled by 2**-53

All arithmetic is modulo 2**64.  The scalar functions are the reference; the
array versions must agree bit for bit.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def splitmix64(z: int) -> int:
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def counter_bits(seed: int, ell: int, j: int) -> int:
    return splitmix64((seed + ell * GOLDEN + j) & MASK64)


def counter_uniform(seed: int, ell: int, j: int) -> float:
    """Uniform double in [0, 1) for the counter (seed, ell, j)."""
    return (counter_bits(seed, ell, j) >> 11) * _INV_2_53


def uniform_range(seed: int, ell: int, j: int, lo: float, hi: float) -> float:
    return lo + counter_uniform(seed, ell, j) * (hi - lo)


def splitmix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def counter_uniform_array(seed: int, ells: np.ndarray, j: int) -> np.ndarray:
    """Vectorised `counter_uniform` over an array of ell values."""
    ells = np.asarray(ells, dtype=np.uint64)
    base = np.uint64((seed + j) & MASK64)
    with np.errstate(over="ignore"):
        z = base + ells * np.uint64(GOLDEN)
    bits = splitmix64_array(z) >> np.uint64(11)
    return bits.astype(np.float64) * _INV_2_53
