"""Marker sequences {k_ell}: constant, closed-form formula, or counter-seeded random.

Every variant is a pure function of ell, evaluated in batches with
``spec.batch(ells)``.  The marker for a node is the one indexed by its
*parent's* linear order, so the build is independent of visit order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import rng
from .errors import MarkerDomainError, ValidationError
from .families import Family, get_family
from .index import depth_of


@dataclass(frozen=True)
class Constant:
    values: tuple[float, ...]

    kind = "constant"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @property
    def dim(self) -> int:
        return len(self.values)

    def batch(self, ells, m: int = 2) -> np.ndarray:
        ells = np.asarray(ells)
        return np.broadcast_to(np.asarray(self.values), (len(ells), self.dim)).copy()

    def describe(self) -> dict:
        return {"type": "constant", "values": list(self.values)}


@dataclass(frozen=True)
class Coupling:
    """k[target] = offset + scale * k[source] (1-based component numbers)."""

    target: int
    source: int
    offset: float = 0.0
    scale: float = 1.0


@dataclass(frozen=True)
class Random:
    """Free components drawn uniformly from their ranges, then sorted pairs, then couplings.

    Component c (1-based) at node ell uses the counter u(seed, ell, c - 1).
    """

    seed: int
    dim: int
    ranges: tuple[tuple[int, float, float], ...]
    couplings: tuple[Coupling, ...] = ()
    sorted_pairs: tuple[tuple[int, int], ...] = ()

    kind = "random"

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & rng.MASK64)
        object.__setattr__(
            self, "ranges", tuple((int(c), float(lo), float(hi)) for c, lo, hi in self.ranges)
        )
        object.__setattr__(self, "couplings", tuple(self.couplings))
        object.__setattr__(self, "sorted_pairs", tuple(tuple(p) for p in self.sorted_pairs))
        seen = set()
        for c, lo, hi in self.ranges:
            if not 1 <= c <= self.dim:
                raise ValidationError(f"component {c} outside 1..{self.dim}")
            if c in seen:
                raise ValidationError(f"component {c} assigned twice")
            if not lo <= hi:
                raise ValidationError(f"empty range [{lo}, {hi}] for component {c}")
            seen.add(c)
        free = {c: (lo, hi) for c, lo, hi in self.ranges}
        for i, j in self.sorted_pairs:
            if i not in free or j not in free or free[i] != free[j]:
                raise ValidationError(
                    f"sorted pair ({i}, {j}) needs two free components with identical ranges"
                )
        for cp in self.couplings:
            if cp.target in seen:
                raise ValidationError(f"component {cp.target} assigned twice")
            if cp.source not in seen:
                raise ValidationError(f"coupling source k{cp.source} is not yet defined")
            seen.add(cp.target)
        if seen != set(range(1, self.dim + 1)):
            missing = sorted(set(range(1, self.dim + 1)) - seen)
            raise ValidationError(f"marker components {missing} are neither ranged nor coupled")

    def _assemble(self, free: np.ndarray) -> np.ndarray:
        """Free-component values (N, p) in `ranges` order -> full markers (N, dim)."""
        K = np.zeros((len(free), self.dim))
        for col, (c, _, _) in enumerate(self.ranges):
            K[:, c - 1] = free[:, col]
        for i, j in self.sorted_pairs:
            lo = np.minimum(K[:, i - 1], K[:, j - 1])
            hi = np.maximum(K[:, i - 1], K[:, j - 1])
            K[:, i - 1], K[:, j - 1] = lo, hi
        for cp in self.couplings:
            K[:, cp.target - 1] = cp.offset + cp.scale * K[:, cp.source - 1]
        return K

    def batch(self, ells, m: int = 2) -> np.ndarray:
        ells = np.asarray(ells, dtype=np.int64)
        free = np.empty((len(ells), len(self.ranges)))
        for col, (c, lo, hi) in enumerate(self.ranges):
            free[:, col] = lo + rng.counter_uniform_array(self.seed, ells, c - 1) * (hi - lo)
        return self._assemble(free)

    def vertices(self) -> np.ndarray:
        """Markers at the corners of the free-range box.

        The reachable marker set is the affine image of a product of intervals
        (and, for sorted pairs, triangles), so these are its extreme points.
        """
        corners = list(itertools.product(*[(lo, hi) for _, lo, hi in self.ranges]))
        return self._assemble(np.asarray(corners, dtype=float).reshape(len(corners), -1))

    def describe(self) -> dict:
        return {
            "type": "random",
            "seed": self.seed,
            "ranges": [list(r) for r in self.ranges],
            "couplings": [[c.target, c.source, c.offset, c.scale] for c in self.couplings],
            "sorted_pairs": [list(p) for p in self.sorted_pairs],
        }


# named formulas ---------------------------------------------------------


@dataclass(frozen=True)
class NamedFormula:
    name: str
    family: str
    dim: int
    evaluate: Callable[[np.ndarray, dict, int | None, int], np.ndarray]
    limit: Callable[[dict], np.ndarray]
    defaults: dict
    needs_seed: bool = False
    doc: str = ""


def _example51(ells, params, seed, m):
    x = ells.astype(float)
    return np.column_stack([(x + 1) / (4 * x + 6), (2 * x + 5) / (8 * x + 16)])


def _series_terms(params: dict, count: int) -> list[float]:
    series = params["series"]
    if series == "invfactorial":
        return [1.0 / math.factorial(i) for i in range(count)]
    if series == "geometric":
        return [params["first"] * params["ratio"] ** i for i in range(count)]
    raise ValidationError(f"unknown series {series!r}; expected invfactorial or geometric")


def _series_limit(params: dict) -> float:
    if params.get("L") is not None:
        return float(params["L"])
    if params["series"] == "invfactorial":
        return math.e
    if params["series"] == "geometric":
        return params["first"] / (1.0 - params["ratio"])
    raise ValidationError(f"unknown series {params['series']!r}")


def fat_cantor_factors(params: dict, n_max: int) -> np.ndarray:
    """b_1..b_n_max (index 0 unused) with b_n = (c - S_n) / (2 (c - S_{n-1})), c = 3L/2.

    S_n is the partial sum a_0 + ... + a_{n-1}; the generation-n intervals then
    have total length 1 - S_n / c.
    """
    c = 1.5 * _series_limit(params)
    a = _series_terms(params, n_max)
    S = np.concatenate([[0.0], np.cumsum(a)])
    b = np.full(n_max + 1, np.nan)
    for n in range(1, n_max + 1):
        b[n] = (c - S[n]) / (2.0 * (c - S[n - 1]))
    return b


def _fatcantor(ells, params, seed, m):
    gen = np.asarray(depth_of(ells, m)) + 1
    b = fat_cantor_factors(params, int(gen.max()) if len(gen) else 1)
    v = b[gen]
    return np.column_stack([v, v])


def _sierpinski56(ells, params, seed, m):
    amp = params["amplitude"]
    x = ells.astype(float)
    draws = [-amp + 2 * amp * rng.counter_uniform_array(seed, ells, j) for j in range(3)]
    k1 = 0.5 + draws[0] / np.sqrt(x + 1)
    k3 = 0.5 + draws[1] / np.sqrt(x + 1)
    k5 = 0.5 + draws[2] / (x + 1)
    return np.column_stack([k1, 1 - k1, k3, 1 - k3, k5, 1 - k5])


def _menger510(ells, params, seed, m):
    x = ells.astype(float)
    sign = np.where(ells % 2 == 0, 1.0, -1.0)
    k1 = 1 / 3 + sign * params["c1"] / (x + 1)
    k3 = 1 / 3 + sign * params["c3"] / (x + 1)
    k5 = 1 / 3 + sign * params["c5"] / (x + 1)
    return np.column_stack([k1, 1 - k1, k3, 1 - k3, k5, 1 - k5])


FORMULAS: dict[str, NamedFormula] = {
    f.name: f
    for f in (
        NamedFormula(
            "example51", "cantor", 2, _example51,
            lambda p: np.array([0.25, 0.25]), {},
            doc="k_ell = ((ell+1)/(4 ell+6), (2 ell+5)/(8 ell+16))",
        ),
        NamedFormula(
            "fatcantor", "cantor", 2, _fatcantor,
            lambda p: np.array([0.5, 0.5]),
            {"series": "invfactorial", "ratio": 0.5, "first": 1.0, "L": None},
            doc="k_ell = (b_n, b_n) for parents in generation n-1; limit set of measure 1/3",
        ),
        NamedFormula(
            "sierpinski56", "sierpinski", 6, _sierpinski56,
            lambda p: np.full(6, 0.5), {"amplitude": 1 / 3}, needs_seed=True,
            doc="k1 = 1/2 + a/sqrt(ell+1), k3 = 1/2 + b/sqrt(ell+1), k5 = 1/2 + c/(ell+1), "
            "even components complementary; a, b, c uniform in [-amplitude, amplitude]",
        ),
        NamedFormula(
            "menger510", "menger", 6, _menger510,
            lambda p: np.array([1 / 3, 2 / 3] * 3), {"c1": 1 / 12, "c3": -1 / 6, "c5": 1 / 18},
            doc="k_{2j-1} = 1/3 + c_j (-1)^ell / (ell+1), k_{2j} = 1 - k_{2j-1}",
        ),
    )
}


@dataclass(frozen=True)
class Formula:
    name: str
    params: tuple[tuple[str, object], ...] = ()
    seed: int | None = None

    kind = "formula"

    def __post_init__(self):
        if self.name not in FORMULAS:
            raise ValidationError(f"unknown formula {self.name!r}; expected one of {sorted(FORMULAS)}")
        if isinstance(self.params, dict):
            object.__setattr__(self, "params", tuple(sorted(self.params.items())))
        unknown = {k for k, _ in self.params} - set(self.formula.defaults)
        if unknown:
            raise ValidationError(f"formula {self.name} has no parameters {sorted(unknown)}")
        if self.formula.needs_seed and self.seed is None:
            raise ValidationError(f"formula {self.name} draws random numbers and needs a seed")
        if self.seed is not None:
            object.__setattr__(self, "seed", int(self.seed) & rng.MASK64)

    @property
    def formula(self) -> NamedFormula:
        return FORMULAS[self.name]

    @property
    def dim(self) -> int:
        return self.formula.dim

    @property
    def param_dict(self) -> dict:
        return {**self.formula.defaults, **dict(self.params)}

    def batch(self, ells, m: int = 2) -> np.ndarray:
        ells = np.asarray(ells, dtype=np.int64)
        if len(ells) == 0:
            return np.empty((0, self.dim))
        return self.formula.evaluate(ells, self.param_dict, self.seed, m)

    def limit_marker(self) -> np.ndarray:
        return self.formula.limit(self.param_dict)

    def describe(self) -> dict:
        out = {"type": "formula", "name": self.name, "params": dict(self.params)}
        if self.seed is not None:
            out["seed"] = self.seed
        return out


MarkerSpec = Constant | Formula | Random


def markers_for(spec: MarkerSpec, ells, m: int) -> np.ndarray:
    return spec.batch(np.asarray(ells, dtype=np.int64), m)


def marker_at(spec: MarkerSpec, ell: int, m: int = 2, family: Family | str | None = None) -> np.ndarray:
    """The marker k_ell; validated against `family` when one is given."""
    if ell < 0:
        raise ValidationError(f"ell must be >= 0, got {ell}")
    k = spec.batch(np.array([ell], dtype=np.int64), m)[0]
    if family is not None:
        if isinstance(family, str):
            family = get_family(family)
        family.validate_marker(k)
    return k


def check_spec(spec: MarkerSpec, family: Family) -> None:
    """Reject specs whose markers can leave the family's marker domain."""
    if spec.dim != family.marker_dim:
        raise MarkerDomainError(
            f"{family.name} markers have {family.marker_dim} components; spec gives {spec.dim}"
        )
    if isinstance(spec, Formula) and spec.formula.family != family.name:
        raise ValidationError(f"formula {spec.name} belongs to the {spec.formula.family} family")
    if isinstance(spec, Constant):
        family.validate_markers(spec.batch([0]))
    elif isinstance(spec, Random):
        # marker domains are convex, so checking the extreme points suffices
        family.validate_markers(spec.vertices())


@dataclass(frozen=True)
class RatioEnvelope:
    """Global bounds valid for every marker this generator can emit.

    t <= L_k and U_k <= r componentwise; w <= ||L_k||_1 and ||U_k||_1 <= u.
    """

    t: np.ndarray
    r: np.ndarray
    w: float
    u: float


def ratio_envelope(spec: MarkerSpec, family: Family) -> RatioEnvelope:
    """Exact envelope of the ratio vectors over all reachable markers.

    Each family's U is a max of affine functions of the marker and L a min, so
    extremes over the (convex) reachable set occur at its vertices.
    """
    if isinstance(spec, Formula):
        raise ValidationError(
            "formula sequences carry no declared global ratio bounds; "
            "use limit mode or supply t/r (or w/u) explicitly"
        )
    check_spec(spec, family)
    K = spec.batch([0]) if isinstance(spec, Constant) else spec.vertices()
    L, U = family.ratio_arrays(K)
    return RatioEnvelope(
        t=L.min(axis=0), r=U.max(axis=0), w=float(L.sum(axis=1).min()), u=float(U.sum(axis=1).max())
    )
