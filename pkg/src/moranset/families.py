"""The three marked families: Cantor intervals, Sierpinski triangles, Menger prisms.

Geometry is carried as plain float arrays so that whole generations can be
mapped at once:

    cantor      (..., 2)      [a, b]
    sierpinski  (..., 3, 2)   [A, B, C]
    menger      (..., 4, 3)   [O, A, B, C], the parallelepiped spanned at O

Every family exposes the same surface: marker validation, the m compression
maps (single and batched), diameters, per-marker ratio vectors (L, U) and the
geometric validators used by the property suites and `verify`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MarkerDomainError, ValidationError

CONTAIN_TOL = 1e-12


@dataclass(frozen=True)
class RatioVector:
    """Per-branch infimum (L) and supremum (U) of diam(child) / diam(parent)."""

    L: np.ndarray
    U: np.ndarray

    def __iter__(self):
        return iter((self.L, self.U))


@dataclass
class DisjointReport:
    """Pairs use 1-based branch numbers; overlap is the penetration depth along the best axis."""

    disjoint: bool
    overlapping_pairs: list[tuple[int, int]] = field(default_factory=list)
    max_overlap: float = 0.0


def interval(a: float, b: float) -> np.ndarray:
    return CANTOR.check_geometry(np.array([a, b], dtype=float))


def triangle(A, B, C) -> np.ndarray:
    return SIERPINSKI.check_geometry(np.array([A, B, C], dtype=float))


def prism(O, A, B, C) -> np.ndarray:
    return MENGER.check_geometry(np.array([O, A, B, C], dtype=float))


def _scale(geom: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(geom))))


def _sat_overlap(P: np.ndarray, Q: np.ndarray, axes: np.ndarray) -> float:
    """Smallest projected overlap of two convex vertex sets over the given axes.

    A value <= tol means some axis separates the interiors.
    """
    norms = np.linalg.norm(axes, axis=1)
    axes = axes[norms > 1e-300] / norms[norms > 1e-300, None]
    if len(axes) == 0:
        return 0.0
    p = P @ axes.T
    q = Q @ axes.T
    overlap = np.minimum(p.max(0), q.max(0)) - np.maximum(p.min(0), q.min(0))
    return float(overlap.min())


class Family:
    name: str
    m: int
    marker_dim: int
    ambient_dim: int
    geom_shape: tuple[int, ...]

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"

    # markers -----------------------------------------------------------

    def validate_markers(self, K) -> np.ndarray:
        K = np.asarray(K, dtype=float)
        if K.ndim != 2 or K.shape[1] != self.marker_dim:
            raise MarkerDomainError(
                f"{self.name} markers need {self.marker_dim} components, got shape {K.shape}"
            )
        if not np.all(np.isfinite(K)):
            raise MarkerDomainError(f"{self.name} marker has non-finite components")
        bad = np.any((K < 0.0) | (K > 1.0), axis=1)
        if bad.any():
            raise MarkerDomainError(
                f"{self.name} marker {K[np.argmax(bad)].tolist()} has components outside [0, 1]"
            )
        self._check_constraints(K)
        return K

    def validate_marker(self, k) -> np.ndarray:
        return self.validate_markers(np.atleast_2d(np.asarray(k, dtype=float)))[0]

    def _check_constraints(self, K: np.ndarray) -> None:
        pass

    # geometry ----------------------------------------------------------

    def check_geometry(self, E) -> np.ndarray:
        E = np.asarray(E, dtype=float)
        if E.shape[-len(self.geom_shape):] != self.geom_shape:
            raise ValidationError(
                f"{self.name} geometry must have trailing shape {self.geom_shape}, got {E.shape}"
            )
        if not np.all(np.isfinite(E)):
            raise ValidationError(f"{self.name} geometry has non-finite coordinates")
        return E

    def default_initial_set(self) -> np.ndarray:
        raise NotImplementedError

    def apply(self, j: int, k, E) -> np.ndarray:
        """Image of one set under the j-th map (1-based) for marker k."""
        if not 1 <= j <= self.m:
            raise ValidationError(f"{self.name} branch must be in 1..{self.m}, got {j}")
        k = self.validate_marker(k)
        E = self.check_geometry(E)
        return self.children(k[None], E[None])[0, j - 1]

    def children(self, K: np.ndarray, G: np.ndarray) -> np.ndarray:
        """All m images of each parent: (N, d) x (N, *shape) -> (N, m, *shape)."""
        raise NotImplementedError

    def diameter(self, G) -> np.ndarray:
        raise NotImplementedError

    def ratio_arrays(self, K: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def ratio_vector(self, k) -> RatioVector:
        k = self.validate_marker(k)
        L, U = self.ratio_arrays(k[None])
        return RatioVector(L[0], U[0])

    def contains(self, parent, child, tol: float = CONTAIN_TOL) -> bool:
        raise NotImplementedError

    def validate_disjoint(self, children, tol: float = CONTAIN_TOL) -> DisjointReport:
        children = [self.check_geometry(c) for c in children]
        pairs = []
        worst = -math.inf
        for i, j in itertools.combinations(range(len(children)), 2):
            ov = self._overlap(children[i], children[j])
            scale = max(_scale(children[i]), _scale(children[j]))
            if ov > tol * scale:
                pairs.append((i + 1, j + 1))
            worst = max(worst, ov)
        return DisjointReport(not pairs, pairs, max(worst, 0.0))

    def _overlap(self, P: np.ndarray, Q: np.ndarray) -> float:
        raise NotImplementedError


class CantorFamily(Family):
    """Closed intervals; f1 keeps the left k1 fraction, f2 the right k2 fraction."""

    name = "cantor"
    m = 2
    marker_dim = 2
    ambient_dim = 1
    geom_shape = (2,)

    def check_geometry(self, E) -> np.ndarray:
        E = super().check_geometry(E)
        if np.any(E[..., 0] > E[..., 1]):
            raise ValidationError("interval endpoints must satisfy a <= b")
        return E

    def default_initial_set(self) -> np.ndarray:
        return np.array([0.0, 1.0])

    def children(self, K, G):
        a, b = G[:, 0], G[:, 1]
        out = np.empty((len(G), 2, 2))
        out[:, 0, 0] = a
        out[:, 0, 1] = K[:, 0] * (b - a) + a
        out[:, 1, 0] = K[:, 1] * (a - b) + b
        out[:, 1, 1] = b
        return out

    def diameter(self, G):
        G = np.asarray(G, dtype=float)
        return G[..., 1] - G[..., 0]

    def ratio_arrays(self, K):
        K = np.asarray(K, dtype=float)
        return K.copy(), K.copy()

    def contains(self, parent, child, tol=CONTAIN_TOL):
        t = tol * _scale(parent)
        return bool(child[0] >= parent[0] - t and child[1] <= parent[1] + t)

    def _overlap(self, P, Q):
        return float(min(P[1], Q[1]) - max(P[0], Q[0]))


class SierpinskiFamily(Family):
    """Triangles (A, B, C); branch i is anchored at the i-th vertex.

    With ``overlap_free=True`` the marker domain additionally requires
    k1 + k4 <= 1, k2 + k5 <= 1 and k3 + k6 <= 1.
    """

    name = "sierpinski"
    m = 3
    marker_dim = 6
    ambient_dim = 2
    geom_shape = (3, 2)

    def __init__(self, overlap_free: bool = False):
        self.overlap_free = overlap_free

    def __repr__(self) -> str:
        return f"SierpinskiFamily(overlap_free={self.overlap_free})"

    def _check_constraints(self, K):
        if not self.overlap_free:
            return
        sums = K[:, [0, 1, 2]] + K[:, [3, 4, 5]]
        bad = np.any(sums > 1.0, axis=1)
        if bad.any():
            raise MarkerDomainError(
                f"marker {K[np.argmax(bad)].tolist()} violates the overlap-free constraints"
            )

    def default_initial_set(self) -> np.ndarray:
        return np.array([[-0.5, 0.0], [0.5, 0.0], [0.0, math.sqrt(3.0) / 2.0]])

    def children(self, K, G):
        A, B, C = G[:, 0], G[:, 1], G[:, 2]
        k = [K[:, i, None] for i in range(6)]
        out = np.empty((len(G), 3, 3, 2))
        out[:, 0, 0] = A
        out[:, 0, 1] = A + k[0] * (B - A)
        out[:, 0, 2] = A + k[1] * (C - A)
        out[:, 1, 0] = B + k[3] * (A - B)
        out[:, 1, 1] = B
        out[:, 1, 2] = B + k[2] * (C - B)
        out[:, 2, 0] = C + k[4] * (A - C)
        out[:, 2, 1] = C + k[5] * (B - C)
        out[:, 2, 2] = C
        return out

    def diameter(self, G):
        G = np.asarray(G, dtype=float)
        A, B, C = G[..., 0, :], G[..., 1, :], G[..., 2, :]
        edges = np.stack(
            [np.linalg.norm(B - A, axis=-1), np.linalg.norm(C - B, axis=-1), np.linalg.norm(A - C, axis=-1)]
        )
        return edges.max(axis=0)

    def ratio_arrays(self, K):
        K = np.asarray(K, dtype=float)
        pairs = K.reshape(len(K), 3, 2)
        return pairs.min(axis=2), pairs.max(axis=2)

    def contains(self, parent, child, tol=CONTAIN_TOL):
        A, B, C = parent
        u, v = B - A, C - A
        det = u[0] * v[1] - u[1] * v[0]
        diam = float(self.diameter(parent))
        if abs(det) <= tol * max(diam, 1e-300) ** 2:
            return self._contains_degenerate(parent, child, tol)
        for P in child:
            w = P - A
            beta = (w[0] * v[1] - w[1] * v[0]) / det
            gamma = (u[0] * w[1] - u[1] * w[0]) / det
            alpha = 1.0 - beta - gamma
            if min(alpha, beta, gamma) < -tol:
                return False
        return True

    def _contains_degenerate(self, parent, child, tol):
        # Collapsed parent: hull is its longest edge (or a point).
        pairs = [(0, 1), (1, 2), (0, 2)]
        i, j = max(pairs, key=lambda p: np.linalg.norm(parent[p[1]] - parent[p[0]]))
        P0, P1 = parent[i], parent[j]
        d = P1 - P0
        L2 = float(d @ d)
        t = tol * _scale(parent)
        for P in child:
            s = 0.0 if L2 == 0.0 else float(np.clip((P - P0) @ d / L2, 0.0, 1.0))
            if np.linalg.norm(P - (P0 + s * d)) > t:
                return False
        return True

    def _overlap(self, P, Q):
        axes = []
        for T in (P, Q):
            for i in range(3):
                e = T[(i + 1) % 3] - T[i]
                axes.append([-e[1], e[0]])
        return _sat_overlap(P, Q, np.asarray(axes))


def menger_index_set() -> list[tuple[int, int, int]]:
    """The 20 cells (a, b, c) in {1,2,3}^3 with at most one coordinate equal to 2.

    Lexicographic order fixes the branch numbering i = 1..20.
    """
    return [
        cell
        for cell in itertools.product((1, 2, 3), repeat=3)
        if sum(1 for x in cell if x == 2) <= 1
    ]


MENGER_CELLS = menger_index_set()
_CELL_IDX = np.asarray(MENGER_CELLS) - 1  # 0-based grid positions, shape (20, 3)


def menger_grid(k) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grids T, R, S = [0, k1, k2, 1], [0, k3, k4, 1], [0, k5, k6, 1]."""
    k = MENGER.validate_marker(k)
    return (
        np.array([0.0, k[0], k[1], 1.0]),
        np.array([0.0, k[2], k[3], 1.0]),
        np.array([0.0, k[4], k[5], 1.0]),
    )


def _grids(K: np.ndarray) -> np.ndarray:
    """(N, 6) markers -> (N, 3, 4) stacked grids T, R, S."""
    N = len(K)
    g = np.empty((N, 3, 4))
    g[:, :, 0] = 0.0
    g[:, :, 1] = K[:, [0, 2, 4]]
    g[:, :, 2] = K[:, [1, 3, 5]]
    g[:, :, 3] = 1.0
    return g


def _menger_matrices(K: np.ndarray, cell: tuple[int, int, int]) -> np.ndarray:
    g = _grids(K)
    a, b, c = (x - 1 for x in cell)
    t0, t1 = g[:, 0, a], g[:, 0, a + 1]
    r0, r1 = g[:, 1, b], g[:, 1, b + 1]
    s0, s1 = g[:, 2, c], g[:, 2, c + 1]
    rows = [(t0, r0, s0), (t1, r0, s0), (t0, r1, s0), (t0, r0, s1)]
    M = np.empty((len(K), 4, 4))
    for i, (t, r, s) in enumerate(rows):
        M[:, i, 0] = 1.0 - (t + r + s)
        M[:, i, 1] = t
        M[:, i, 2] = r
        M[:, i, 3] = s
    return M


def menger_matrix(k, cell: tuple[int, int, int]) -> np.ndarray:
    """The 4x4 affine-combination matrix M_k(a, b, c); each row sums to 1."""
    if tuple(cell) not in MENGER_CELLS:
        raise ValidationError(f"{cell} is not a Menger cell")
    k = MENGER.validate_marker(k)
    return _menger_matrices(k[None], tuple(cell))[0]


class MengerFamily(Family):
    """Parallelepipeds (O, A, B, C) split on the grid T x R x S, 20 cells kept."""

    name = "menger"
    m = 20
    marker_dim = 6
    ambient_dim = 3
    geom_shape = (4, 3)

    def _check_constraints(self, K):
        bad = (K[:, 0] > K[:, 1]) | (K[:, 2] > K[:, 3]) | (K[:, 4] > K[:, 5])
        if bad.any():
            raise MarkerDomainError(
                f"marker {K[np.argmax(bad)].tolist()} violates k1<=k2, k3<=k4, k5<=k6"
            )

    def default_initial_set(self) -> np.ndarray:
        return np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])

    def children(self, K, G):
        out = np.empty((len(G), 20, 4, 3))
        for i, cell in enumerate(MENGER_CELLS):
            M = _menger_matrices(K, cell)
            out[:, i] = np.einsum("nij,njk->nik", M, G)
        return out

    @staticmethod
    def corners(G) -> np.ndarray:
        G = np.asarray(G, dtype=float)
        O = G[..., 0, :]
        u, v, w = (G[..., i, :] - O for i in (1, 2, 3))
        cs = [O + a * u + b * v + c * w for a, b, c in itertools.product((0, 1), repeat=3)]
        return np.stack(cs, axis=-2)

    def diameter(self, G):
        # Corner differences are a*u + b*v + c*w with a, b, c in {-1, 0, 1};
        # the norm is convex, so the maximum sits on one of the four diagonals.
        G = np.asarray(G, dtype=float)
        O = G[..., 0, :]
        u, v, w = (G[..., i, :] - O for i in (1, 2, 3))
        diags = np.stack([u + v + w, u + v - w, u - v + w, -u + v + w])
        return np.linalg.norm(diags, axis=-1).max(axis=0)

    def ratio_arrays(self, K):
        K = np.asarray(K, dtype=float)
        gaps = np.diff(_grids(K), axis=2)  # (N, 3, 3): axis, interval index
        per_branch = np.stack(
            [gaps[:, 0, _CELL_IDX[:, 0]], gaps[:, 1, _CELL_IDX[:, 1]], gaps[:, 2, _CELL_IDX[:, 2]]],
            axis=-1,
        )  # (N, 20, 3)
        return per_branch.min(axis=2), per_branch.max(axis=2)

    def contains(self, parent, child, tol=CONTAIN_TOL):
        # Tolerance is a length: affine coordinates are scaled by the parent's
        # height across each face pair, so thin parents do not amplify rounding.
        O = parent[0]
        E = (parent[1:] - O).T  # columns u, v, w
        t = tol * _scale(parent)
        coords = np.linalg.pinv(E) @ (self.corners(child) - O).T
        recon = E @ coords + O[:, None]
        if np.max(np.abs(recon.T - self.corners(child))) > t * 10:
            return False
        u, v, w = E.T
        faces = np.array([np.cross(v, w), np.cross(w, u), np.cross(u, v)])
        areas = np.linalg.norm(faces, axis=1)
        vol = abs(float(np.linalg.det(E)))
        excess = np.maximum(-coords, coords - 1.0)  # (3, 8), per edge direction
        if vol <= 1e-300 or np.any(areas <= 0):
            return bool(np.all(excess <= tol))  # flat parent: coordinates only
        heights = vol / areas
        return bool(np.all(excess * heights[:, None] <= t))

    def _overlap(self, P, Q):
        eP = [P[i] - P[0] for i in (1, 2, 3)]
        eQ = [Q[i] - Q[0] for i in (1, 2, 3)]
        axes = [np.cross(e[i], e[j]) for e in (eP, eQ) for i, j in ((0, 1), (1, 2), (0, 2))]
        axes += [np.cross(a, b) for a in eP for b in eQ]
        axes += list(np.eye(3))
        return _sat_overlap(self.corners(P), self.corners(Q), np.asarray(axes))


CANTOR = CantorFamily()
SIERPINSKI = SierpinskiFamily()
MENGER = MengerFamily()

FAMILIES = {"cantor": CantorFamily, "sierpinski": SierpinskiFamily, "menger": MengerFamily}


def get_family(name: str, **options) -> Family:
    try:
        cls = FAMILIES[name]
    except KeyError:
        raise ValidationError(f"unknown family {name!r}; expected one of {sorted(FAMILIES)}") from None
    return cls(**options)


def cantor_apply(j: int, k, I) -> np.ndarray:
    return CANTOR.apply(j, k, I)


def sierpinski_apply(j: int, k, T) -> np.ndarray:
    return SIERPINSKI.apply(j, k, T)


def menger_apply(i: int, k, P) -> np.ndarray:
    return MENGER.apply(i, k, P)


def ratio_vector(family: Family | str, k) -> RatioVector:
    if isinstance(family, str):
        family = get_family(family)
    return family.ratio_vector(k)


def validate_disjoint(family: Family | str, children, tol: float = CONTAIN_TOL) -> DisjointReport:
    if isinstance(family, str):
        family = get_family(family)
    return family.validate_disjoint(children, tol)
