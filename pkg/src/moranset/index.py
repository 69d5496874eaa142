"""Index algebra for the construction tree.

A word sigma = (i_1, ..., i_k) with digits in 1..m has linear order

    ell(sigma) = sum_{p=0}^{k-1} m**p * i_{k-p}

so that ell(sigma * j) = m * ell(sigma) + j and generation n occupies the
contiguous range (G_m(n-1), G_m(n)] with G_m(n) = m + m**2 + ... + m**n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidBranchingError, InvalidIndexError


def _check_m(m: int) -> None:
    if int(m) != m or m < 2:
        raise InvalidBranchingError(f"branching factor must be an integer >= 2, got {m!r}")


@dataclass(frozen=True)
class MultiIndex:
    digits: tuple[int, ...]
    m: int

    def __post_init__(self) -> None:
        _check_m(self.m)
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        for d in self.digits:
            if not 1 <= d <= self.m:
                raise InvalidIndexError(f"digit {d} outside 1..{self.m}")

    def generation(self) -> int:
        return len(self.digits)

    def __mul__(self, other: MultiIndex | int) -> MultiIndex:
        if isinstance(other, MultiIndex):
            if other.m != self.m:
                raise InvalidIndexError("cannot concatenate words with different m")
            return MultiIndex(self.digits + other.digits, self.m)
        return MultiIndex(self.digits + (int(other),), self.m)

    def child(self, j: int) -> MultiIndex:
        return self * j

    def parent(self) -> MultiIndex:
        if not self.digits:
            raise InvalidIndexError("the empty word has no parent")
        return MultiIndex(self.digits[:-1], self.m)

    def linear_index(self) -> int:
        return linear_index(self)

    def to_string(self) -> str:
        return format_sigma(self.digits, self.m)

    @classmethod
    def from_ell(cls, ell: int, m: int) -> MultiIndex:
        return sigma_of(ell, m)


def linear_index(sigma: MultiIndex) -> int:
    """Position of sigma in the ordered set D (the empty word maps to 0)."""
    m = sigma.m
    ell = 0
    for d in sigma.digits:
        if not 1 <= d <= m:
            raise InvalidIndexError(f"digit {d} outside 1..{m}")
        ell = m * ell + d
    return ell


def sigma_of(ell: int, m: int) -> MultiIndex:
    """Inverse of `linear_index`."""
    _check_m(m)
    if ell < 0:
        raise InvalidIndexError(f"linear index must be >= 0, got {ell}")
    digits = []
    while ell > 0:
        d = (ell - 1) % m + 1
        digits.append(d)
        ell = (ell - d) // m
    return MultiIndex(tuple(reversed(digits)), m)


def generation_size(m: int, n: int) -> int:
    """G_m(n): number of nodes in generations 1..n (0 for n = 0)."""
    _check_m(m)
    if n < 0:
        raise InvalidIndexError(f"generation must be >= 0, got {n}")
    return (m ** (n + 1) - m) // (m - 1)


def generation_range(m: int, n: int) -> range:
    """Linear indices of generation n."""
    if n == 0:
        return range(0, 1)
    return range(generation_size(m, n - 1) + 1, generation_size(m, n) + 1)


def depth_of(ell, m: int):
    """Generation of the node(s) with linear index ell; accepts arrays."""
    _check_m(m)
    arr = np.asarray(ell, dtype=np.int64)
    if np.any(arr < 0):
        raise InvalidIndexError("linear index must be >= 0")
    top = int(arr.max()) if arr.size else 0
    bounds = [0]
    while bounds[-1] < top:
        bounds.append(bounds[-1] * m + m)
    depth = np.searchsorted(np.asarray(bounds, dtype=np.int64), arr, side="left")
    return int(depth) if np.ndim(ell) == 0 else depth


def format_sigma(digits, m: int) -> str:
    if not digits:
        return "-"
    if m <= 9:
        return "".join(str(d) for d in digits)
    return ".".join(str(d) for d in digits)


def parse_sigma(text: str, m: int) -> MultiIndex:
    if text == "-":
        return MultiIndex((), m)
    parts = text.split(".") if m > 9 else list(text)
    return MultiIndex(tuple(int(p) for p in parts), m)
