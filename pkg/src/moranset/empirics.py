"""Box-counting estimates for generation snapshots.

A set occupies a grid cell when it meets the cell's interior; sets that touch
a cell only along its boundary do not count.  The grid is anchored at the
lower corner of the scene's bounding box.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

REL_TOL = 1e-12
_MAX_PAIRS = 1 << 16


@dataclass(frozen=True)
class BoxCountSample:
    epsilon: float
    count: int


@dataclass
class BoxDimEstimate:
    slope: float
    intercept: float
    residual: float
    samples: list[BoxCountSample] = field(default_factory=list)
    dropped: list[float] = field(default_factory=list)


def _as_vertices(sets) -> np.ndarray:
    """Normalise intervals (N,2), triangles (N,3,2), prisms (N,4,3) to vertex arrays."""
    S = np.asarray(sets, dtype=float)
    if S.ndim == 1:
        S = S[None]
    if S.ndim == 2 and S.shape[1] == 2:
        return S[:, :, None]  # two 1-D vertices
    if S.ndim == 3 and S.shape[1:] == (3, 2):
        return S
    if S.ndim == 3 and S.shape[1:] == (4, 3):
        O = S[:, 0]
        u, v, w = (S[:, i] - O for i in (1, 2, 3))
        cs = [O + a * u + b * v + c * w for a, b, c in itertools.product((0, 1), repeat=3)]
        return np.stack(cs, axis=1)
    if S.ndim == 2 and S.shape[1] == 1:
        return S[:, :, None]
    raise DomainError(f"unsupported set array shape {S.shape}")


def _kind(sets) -> str:
    S = np.asarray(sets)
    if S.ndim <= 2:
        return "interval"
    return "triangle" if S.shape[1:] == (3, 2) else "prism"


def scene_bbox(sets) -> np.ndarray:
    V = _as_vertices(sets)
    return np.stack([V.min(axis=(0, 1)), V.max(axis=(0, 1))])


def _axis_aligned(V: np.ndarray) -> bool:
    """True when every set is an axis-aligned box (intervals always are)."""
    if V.shape[2] == 1:
        return True
    if V.shape[1] != 8:
        return False
    edges = V[:, [1, 2, 4]] - V[:, [0, 0, 0]]
    nonzero = np.count_nonzero(np.abs(edges) > 0, axis=2)
    return bool(np.all(nonzero <= 1))


def _sep_axes(V: np.ndarray, kind: str) -> np.ndarray:
    """Candidate separating axes per set, (N, A, D), beyond the grid axes."""
    if kind == "triangle":
        e = np.roll(V, -1, axis=1) - V
        return np.stack([-e[..., 1], e[..., 0]], axis=-1)
    # prism corners ordered by (a, b, c) in {0,1}^3: edges along c, b, a
    u = V[:, 4] - V[:, 0]
    v = V[:, 2] - V[:, 0]
    w = V[:, 1] - V[:, 0]
    eye = np.eye(3)
    axes = [np.cross(u, v), np.cross(v, w), np.cross(u, w)]
    axes += [np.cross(e, np.broadcast_to(eye[i], e.shape)) for e in (u, v, w) for i in range(3)]
    return np.stack(axes, axis=1)


def _cells_convex(V, kind, eps, origin, tol):
    """Occupied cells for general convex sets via separating-axis tests."""
    D = V.shape[2]
    rel_lo = (V.min(axis=1) - origin) / eps
    rel_hi = (V.max(axis=1) - origin) / eps
    ti = tol / eps
    i0 = np.floor(rel_lo + ti).astype(np.int64)
    i1 = np.ceil(rel_hi - ti).astype(np.int64) - 1
    i1 = np.maximum(i1, i0)
    span = i1 - i0 + 1

    axes = _sep_axes(V, kind)
    norms = np.linalg.norm(axes, axis=-1, keepdims=True)
    axes = np.where(norms > 1e-300, axes / np.where(norms > 0, norms, 1), 0.0)
    proj = np.einsum("nvd,nad->nav", V, axes)
    pmin, pmax = proj.min(axis=2), proj.max(axis=2)
    corners = np.asarray(list(itertools.product((0, 1), repeat=D)), dtype=float)

    found = []
    width = span.max(axis=0)
    offs = np.asarray(list(itertools.product(*[range(w) for w in width])), dtype=np.int64)
    step = max(1, _MAX_PAIRS // max(1, len(offs)))
    for s in range(0, len(V), step):
        sl = slice(s, s + step)
        cells = i0[sl, None, :] + offs[None]  # (n, C, D)
        valid = np.all(offs[None] < span[sl, None, :], axis=2)
        # cell corners projected onto each set's axes
        cc = (cells[:, :, None, :] + corners[None, None]) * eps + origin  # (n, C, 2^D, D)
        cp = np.einsum("ncvd,nad->ncav", cc, axes[sl])
        ov = np.minimum(cp.max(axis=3), pmax[sl, None]) - np.maximum(cp.min(axis=3), pmin[sl, None])
        degenerate_axis = np.all(axes[sl] == 0, axis=2)[:, None, :]
        hit = valid & np.all((ov > tol) | degenerate_axis, axis=2)
        # grid axes: candidate cells overlap the bbox by construction unless degenerate
        lo_ok = (cells + 1) * eps + origin - V[sl].min(axis=1)[:, None, :] > tol
        hi_ok = V[sl].max(axis=1)[:, None, :] - (cells * eps + origin) > tol
        hit &= np.all(lo_ok & hi_ok, axis=2)
        none = ~hit.any(axis=1)
        hit[none, 0] = True  # degenerate set: keep the cell containing its first vertex
        found.append(cells[hit])
    return np.concatenate(found) if found else np.empty((0, D), dtype=np.int64)


def _cells_boxes(V, eps, origin, tol):
    lo = (V.min(axis=1) - origin) / eps
    hi = (V.max(axis=1) - origin) / eps
    ti = tol / eps
    i0 = np.floor(lo + ti).astype(np.int64)
    i1 = np.maximum(np.ceil(hi - ti).astype(np.int64) - 1, i0)
    D = V.shape[2]
    if D == 1:
        # union of integer ranges
        order = np.argsort(i0[:, 0], kind="stable")
        a, b = i0[order, 0], i1[order, 0]
        count = 0
        cur_lo, cur_hi = a[0], b[0]
        for x, y in zip(a[1:], b[1:]):
            if x > cur_hi:
                count += cur_hi - cur_lo + 1
                cur_lo, cur_hi = x, y
            else:
                cur_hi = max(cur_hi, y)
        count += cur_hi - cur_lo + 1
        return int(count)
    cells = []
    for lo_i, hi_i in zip(i0, i1):
        grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo_i, hi_i)], indexing="ij")
        cells.append(np.stack([g.ravel() for g in grids], axis=1))
    return np.concatenate(cells)


def box_count(sets, epsilon: float, bbox=None) -> int:
    """Number of grid cells of side epsilon whose interior meets at least one set."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    V = _as_vertices(sets)
    if len(V) == 0:
        raise DomainError("box counting needs at least one set")
    box = scene_bbox(sets) if bbox is None else np.asarray(bbox, dtype=float).reshape(2, -1)
    origin = box[0]
    extent = float(np.max(box[1] - box[0])) or 1.0
    tol = REL_TOL * extent
    if _axis_aligned(V):
        cells = _cells_boxes(V, epsilon, origin, tol)
        if isinstance(cells, int):
            return cells
    else:
        cells = _cells_convex(V, _kind(sets), epsilon, origin, tol)
    return int(len(np.unique(cells, axis=0)))


def max_diameter(sets) -> float:
    V = _as_vertices(sets)
    diffs = V[:, :, None, :] - V[:, None, :, :]
    return float(np.sqrt((diffs**2).sum(-1)).max())


def estimate_dimension(sets, epsilons, bbox=None, *, guard: bool = True) -> BoxDimEstimate:
    """Least-squares slope of log N(eps) against log(1/eps).

    With ``guard`` set, scales below max set diameter / 4 are dropped: there the
    count reflects the finite generation rather than the limit set.
    """
    eps = sorted((float(e) for e in epsilons), reverse=True)
    dropped = []
    if guard:
        floor = max_diameter(sets) / 4.0
        dropped = [e for e in eps if e < floor]
        eps = [e for e in eps if e >= floor]
    if len(eps) < 3:
        raise DomainError(f"need at least 3 usable scales, got {len(eps)} (dropped {dropped})")
    samples = [BoxCountSample(e, box_count(sets, e, bbox)) for e in eps]
    x = np.log([1.0 / s.epsilon for s in samples])
    y = np.log([s.count for s in samples])
    if np.ptp(y) == 0:
        warnings.warn("box counts are constant across scales; slope is ill-conditioned", RuntimeWarning, stacklevel=2)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return BoxDimEstimate(float(slope), float(intercept), resid, samples, dropped)
