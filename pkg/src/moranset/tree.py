"""Generation builder: (family, marker sequence, E0) -> dense tree indexed by ell."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError
from .families import Family, get_family
from .index import MultiIndex, generation_range, generation_size, sigma_of
from .markers import MarkerSpec, check_spec

DEFAULT_MAX_RECORDS = 2**26
DEGENERATE_DIAM = 1e-300


class DegenerateGeometryWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class GenSet:
    ell: int
    sigma: MultiIndex
    geometry: np.ndarray
    diam: float


@dataclass
class GenerationTree:
    """Nodes 0..G_m(n) stored densely; row ell holds J_sigma for sigma = sigma_of(ell).

    ``markers[ell]`` is the marker used to split node ell (parents only).
    Nodes below a degenerate ancestor are marked dead and hold NaN geometry.
    """

    family: Family
    n: int
    geometry: np.ndarray
    diam: np.ndarray
    alive: np.ndarray
    markers: np.ndarray | None = None
    seed: int | None = None

    @property
    def m(self) -> int:
        return self.family.m

    @property
    def initial_set(self) -> np.ndarray:
        return self.geometry[0]

    def __len__(self) -> int:
        return len(self.diam)

    def generation(self, g: int) -> range:
        if not 0 <= g <= self.n:
            raise ValidationError(f"generation {g} outside 0..{self.n}")
        return generation_range(self.m, g)

    def sets(self, g: int | None = None, *, alive_only: bool = True) -> np.ndarray:
        rg = self.generation(self.n if g is None else g)
        sl = slice(rg.start, rg.stop)
        geom = self.geometry[sl]
        return geom[self.alive[sl]] if alive_only else geom

    def children_of(self, ell: int) -> range:
        return range(self.m * ell + 1, self.m * ell + self.m + 1)

    def node(self, ell: int) -> GenSet:
        return GenSet(ell, sigma_of(ell, self.m), self.geometry[ell], float(self.diam[ell]))

    def __iter__(self):
        return (self.node(ell) for ell in range(len(self)))


def _split(family, markers, geometry, parents, alive):
    children = np.full((len(parents), family.m) + family.geom_shape, np.nan)
    live = alive[parents]
    if live.any():
        children[live] = family.children(markers[live], geometry[parents][live])
    return children


def build_tree(
    family: Family | str,
    E0,
    spec: MarkerSpec,
    n: int,
    *,
    max_records: int = DEFAULT_MAX_RECORDS,
    seed: int | None = None,
    workers: int = 1,
    chunk_size: int = 1 << 16,
) -> GenerationTree:
    """Populate every node through generation n.

    Child m*ell + j is f_{k_ell}^{(j)} applied to node ell.  ``workers > 1``
    splits each generation into chunks mapped on a thread pool; the result is
    identical to the serial build.
    """
    if isinstance(family, str):
        family = get_family(family)
    if n < 0:
        raise ValidationError(f"generation count must be >= 0, got {n}")
    m = family.m
    if m**n > max_records:
        raise CapacityError(f"m**n = {m}**{n} exceeds the record cap {max_records}")
    check_spec(spec, family)
    E0 = family.check_geometry(E0)
    if E0.shape != family.geom_shape:
        raise ValidationError(f"initial set must have shape {family.geom_shape}, got {E0.shape}")

    total = generation_size(m, n) + 1
    geometry = np.full((total,) + family.geom_shape, np.nan)
    geometry[0] = E0
    diam = np.full(total, np.nan)
    diam[0] = family.diameter(E0)
    alive = np.zeros(total, dtype=bool)
    alive[0] = True
    n_parents = generation_size(m, n - 1) + 1 if n > 0 else 0
    markers = np.full((n_parents, family.marker_dim), np.nan)

    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for g in range(1, n + 1):
            prg = generation_range(m, g - 1)
            parents = np.arange(prg.start, prg.stop)
            degenerate = alive[parents] & ~(diam[parents] >= DEGENERATE_DIAM)
            if degenerate.any():
                warnings.warn(
                    f"{int(degenerate.sum())} node(s) in generation {g - 1} have diameter "
                    f"< {DEGENERATE_DIAM:g}; their subtrees are not deepened",
                    DegenerateGeometryWarning,
                    stacklevel=2,
                )
            K = family.validate_markers(spec.batch(parents, m))
            markers[prg.start:prg.stop] = K
            can_split = alive.copy()
            can_split[parents[degenerate]] = False

            chunks = [parents[i:i + chunk_size] for i in range(0, len(parents), chunk_size)]
            offsets = [i for i in range(0, len(parents), chunk_size)]

            def work(chunk, off=0):
                return _split(family, K[off:off + len(chunk)], geometry, chunk, can_split)

            if pool is None:
                results = [work(c, o) for c, o in zip(chunks, offsets)]
            else:
                results = list(pool.map(work, chunks, offsets))

            crg = generation_range(m, g)
            kids = np.concatenate(results).reshape((-1,) + family.geom_shape)
            geometry[crg.start:crg.stop] = kids
            child_alive = np.repeat(can_split[parents], m)
            alive[crg.start:crg.stop] = child_alive
            d = np.full(len(kids), np.nan)
            d[child_alive] = family.diameter(kids[child_alive])
            diam[crg.start:crg.stop] = d
    finally:
        if pool is not None:
            pool.shutdown()

    return GenerationTree(family, n, geometry, diam, alive, markers, seed)
