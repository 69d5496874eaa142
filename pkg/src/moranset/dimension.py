"""Hausdorff-dimension bounds from per-branch diameter ratios.

The workhorse is the decreasing function g(s) = sum_j x_j**s.  A lower
bound s_* is the largest s with inf_ell sum_j L_{ell,j}**s >= 1, an upper
bound s^* the smallest s with sup_ell sum_j U_{ell,j}**s < 1; both are found
by bisection on [1e-9, 64].
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import BracketError, DegenerateError, DomainError, ValidationError
from .tree import GenerationTree

S_MIN = 1e-9
S_MAX = 64.0
S_TOL = 1e-12
MAX_ITER = 200
BOUNDARY_TOL = 1e-12

METHODS = ("theorem43", "limit", "vector", "uniform", "mean")


@dataclass
class BoundsReport:
    lower: float | None
    upper: float | None
    method: str
    inputs: dict = field(default_factory=dict)
    exact: bool = False
    rigorous: bool = True
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ConditionReport:
    """Per-generation ratios sum_j diam(child)^s / diam(parent)^s over a finite tree.

    kind="upper": ``values`` holds c_k (max over parents), ``products`` the running
    product; kind="lower": ``values`` holds the per-generation minimum.
    """

    kind: str
    s: float
    values: list[float]
    products: list[float]
    holds: bool
    trend: str

    def to_dict(self) -> dict:
        return asdict(self)


def _as_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) == 0:
        raise DomainError(f"expected a nonempty vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("vector components must be finite")
    return x


def s_norm(x, s: float) -> float:
    """(sum |x_i|**s) ** (1/s); a quasi-norm for s < 1."""
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    x = np.abs(_as_vector(x))
    return float(np.sum(x**s) ** (1.0 / s))


def _power_sum(X: np.ndarray, s: float) -> np.ndarray:
    """Row sums of X**s for a (N, m) array of nonnegative ratios."""
    return np.sum(X**s, axis=-1)


def _bisect(pred, lo: float = S_MIN, hi: float = S_MAX) -> float:
    """Boundary of a predicate true on [lo, b) and false on (b, hi]."""
    for _ in range(MAX_ITER):
        if hi - lo <= S_TOL:
            break
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def moran_root(t) -> float:
    """Unique s with sum t_i**s = 1 for t in (0, 1)^m, m >= 2."""
    t = _as_vector(t)
    if len(t) < 2:
        raise DomainError("moran_root needs at least two ratios")
    if np.any(t <= 0) or np.any(t >= 1):
        raise DomainError(f"ratios must lie in (0, 1), got {t.tolist()}")
    if _power_sum(t, S_MAX) > 1:
        raise BracketError(f"sum t_i**s exceeds 1 at s={S_MAX}; root outside [{S_MIN}, {S_MAX}]")
    return _bisect(lambda s: _power_sum(t, s) > 1)


def _lower_from_sequence(L: np.ndarray, notes: list[str]) -> float | None:
    if np.any(L >= 1, axis=1).all():
        notes.append("every L vector has a component >= 1: lower condition holds for all s (unbounded)")
        return None
    if np.min(_power_sum(L, S_MIN)) < 1:
        notes.append("inf ||L||_s < 1 even as s -> 0: lower condition never holds")
        return None
    if np.min(_power_sum(L, S_MAX)) >= 1:
        raise BracketError(f"lower condition still holds at s={S_MAX}")
    return _bisect(lambda s: np.min(_power_sum(L, s)) >= 1)


def _upper_from_sequence(U: np.ndarray, notes: list[str]) -> float | None:
    if np.any(np.any(U >= 1, axis=1)):
        notes.append("some U vector has a component >= 1: ||U||_s >= 1 for every s, no upper bound")
        return None
    if np.max(_power_sum(U, S_MAX)) >= 1:
        raise BracketError(f"upper condition fails even at s={S_MAX}")
    if np.max(_power_sum(U, S_MIN)) < 1:
        return S_MIN
    return _bisect(lambda s: np.max(_power_sum(U, s)) >= 1)


def _ratio_sequence(seq, name: str) -> np.ndarray:
    X = np.asarray(seq, dtype=float)
    if X.ndim == 1:
        X = X[None]
    if X.ndim != 2 or X.size == 0:
        raise DomainError(f"{name} must be a nonempty sequence of vectors")
    if not np.all(np.isfinite(X)) or np.any(X < 0):
        raise DomainError(f"{name} components must be finite and nonnegative")
    return X


def bounds_theorem43(L_seq=None, U_seq=None, *, declared_global: bool = False) -> BoundsReport:
    """Bounds from inf/sup over a sequence of ratio vectors.

    A finite sequence only certifies the bounds when its inf/sup equals the
    global one; pass ``declared_global=True`` when the caller guarantees that
    (e.g. the rows are declared extreme vectors), otherwise the report is
    flagged as finite-horizon.
    """
    notes: list[str] = []
    lower = upper = None
    inputs = {}
    if L_seq is not None:
        L = _ratio_sequence(L_seq, "L sequence")
        inputs["L_rows"] = len(L)
        lower = _lower_from_sequence(L, notes)
    if U_seq is not None:
        U = _ratio_sequence(U_seq, "U sequence")
        inputs["U_rows"] = len(U)
        upper = _upper_from_sequence(U, notes)
    if not declared_global:
        notes.append("finite-horizon: valid only if the finite inf/sup equals the global one")
    return BoundsReport(lower, upper, "theorem43", inputs, False, declared_global, notes)


def _root_or_none(x: np.ndarray, side: str, notes: list[str]) -> float | None:
    if side == "upper" and np.any(x >= 1):
        notes.append("upper ratio vector has a component >= 1: no upper bound")
        return None
    if side == "lower":
        if np.any(x >= 1):
            notes.append("lower ratio vector has a component >= 1: lower condition holds for all s")
            return None
        pos = x[x > 0]
        if len(pos) < len(x):
            notes.append("zero lower ratios dropped; they contribute nothing to ||L||_s")
        if len(pos) < 2:
            notes.append("fewer than two positive lower ratios: no positive lower bound")
            return None
        x = pos
    elif np.any(x <= 0):
        raise DomainError("upper ratios must be positive")
    return moran_root(x)


def bounds_vector(t=None, r=None) -> BoundsReport:
    """Bounds from componentwise global envelopes t <= L_k, U_k <= r."""
    notes: list[str] = []
    inputs = {}
    lower = upper = None
    if t is not None:
        t = _as_vector(t)
        inputs["t"] = t.tolist()
        lower = _root_or_none(t, "lower", notes)
    if r is not None:
        r = _as_vector(r)
        inputs["r"] = r.tolist()
        upper = _root_or_none(r, "upper", notes)
    exact = t is not None and r is not None and np.array_equal(t, r) and lower is not None
    if exact:
        upper = lower
    return BoundsReport(lower, upper, "vector", inputs, bool(exact), True, notes)


def bounds_limit(L_limit, U_limit) -> BoundsReport:
    """s_* and s^* from the limiting ratio vectors.

    The defining inequalities are strict; their boundary is the Moran root of
    the limit vector, which is what is returned.
    """
    L = _as_vector(L_limit)
    U = _as_vector(U_limit)
    for x, name in ((L, "L"), (U, "U")):
        if np.any(x <= 0) or np.any(x >= 1):
            raise DomainError(f"{name} limit components must lie in (0, 1), got {x.tolist()}")
    lower = moran_root(L)
    exact = bool(np.array_equal(L, U))
    upper = lower if exact else moran_root(U)
    return BoundsReport(
        lower, upper, "limit", {"L_limit": L.tolist(), "U_limit": U.tolist()}, exact, True,
        ["boundary of the strict-inequality region"],
    )


def bounds_uniform(m: int, t: float, r: float) -> BoundsReport:
    """log m / -log t <= dim <= log m / -log r for L_k >= t, U_k <= r."""
    if int(m) != m or m < 2:
        raise ValidationError(f"m must be an integer >= 2, got {m}")
    if not (0 < t < 1 and 0 < r < 1):
        raise DomainError(f"t and r must lie in (0, 1), got t={t}, r={r}")
    if t > r:
        raise DomainError(f"need t <= r, got t={t}, r={r}")
    lm = math.log(m)
    lower = lm / -math.log(t)
    upper = lower if t == r else lm / -math.log(r)
    return BoundsReport(lower, upper, "uniform", {"m": m, "t": t, "r": r}, t == r, True, [])


def bounds_mean(m: int, w: float | None = None, u: float | None = None) -> BoundsReport:
    """Bounds from w = inf ||L_k||_1 (needs w >= 1) and u = sup ||U_k||_1 (needs u < 1)."""
    if int(m) != m or m < 2:
        raise ValidationError(f"m must be an integer >= 2, got {m}")
    lm = math.log(m)
    notes = []
    lower = upper = None
    if w is not None:
        if w <= 0:
            raise DomainError(f"w must be positive, got {w}")
        if w >= 1:
            lower = lm / (lm - math.log(w))
        else:
            notes.append("w < 1: mean lower bound does not apply")
    if u is not None:
        if u <= 0:
            raise DomainError(f"u must be positive, got {u}")
        if u < 1:
            upper = lm / (lm - math.log(u))
        else:
            notes.append("u >= 1: mean upper bound does not apply")
    return BoundsReport(lower, upper, "mean", {"m": m, "w": w, "u": u}, False, True, notes)


# finite-prefix condition checks -----------------------------------------------


def _sibling_ratios(tree: GenerationTree, g: int, s: float) -> np.ndarray:
    """sum_j diam(child)^s / diam(parent)^s for every live parent in generation g-1."""
    m = tree.m
    prg = tree.generation(g - 1)
    crg = tree.generation(g)
    pd = tree.diam[prg.start:prg.stop]
    cd = tree.diam[crg.start:crg.stop].reshape(-1, m)
    live = tree.alive[crg.start:crg.stop].reshape(-1, m).all(axis=1)
    pd, cd = pd[live], cd[live]
    if np.any(pd <= 0):
        raise DegenerateError(f"zero-diameter parent in generation {g - 1}")
    return np.sum(cd**s, axis=1) / pd**s


def _check_tree(tree: GenerationTree, s: float) -> None:
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    if tree.n < 1:
        raise ValidationError("condition checks need a tree of depth >= 1")


def check_prop21(tree: GenerationTree, s: float) -> ConditionReport:
    """c_k = max over parents of the sibling ratio sum; reports the running product trend."""
    _check_tree(tree, s)
    cs = [float(np.max(_sibling_ratios(tree, g, s))) for g in range(1, tree.n + 1)]
    products = list(np.cumprod(cs))
    if all(abs(c - 1) <= BOUNDARY_TOL for c in cs):
        trend = "boundary"
    elif all(c < 1 for c in cs):
        trend = "decaying"
    elif products[-1] < products[0]:
        trend = "mixed-decreasing"
    else:
        trend = "not-decaying"
    return ConditionReport("upper", s, cs, [float(p) for p in products], trend == "decaying", trend)


def check_prop22(tree: GenerationTree, s: float) -> ConditionReport:
    """Minimum sibling ratio sum per generation; holds when all are >= 1 - 1e-12."""
    _check_tree(tree, s)
    mins = [float(np.min(_sibling_ratios(tree, g, s))) for g in range(1, tree.n + 1)]
    overall = min(mins)
    holds = overall >= 1 - BOUNDARY_TOL
    trend = "boundary" if all(abs(v - 1) <= BOUNDARY_TOL for v in mins) else ("holds" if holds else "fails")
    return ConditionReport("lower", s, mins, [], holds, trend)


def natural_measure(tree: GenerationTree, s: float) -> np.ndarray:
    """Weights mu(J_sigma) indexed by ell: root 1, split among siblings proportional to diam^s."""
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    m = tree.m
    mu = np.full(len(tree), np.nan)
    mu[0] = 1.0
    for g in range(1, tree.n + 1):
        prg = tree.generation(g - 1)
        crg = tree.generation(g)
        cd = tree.diam[crg.start:crg.stop].reshape(-1, m)
        live = tree.alive[crg.start:crg.stop].reshape(-1, m).all(axis=1)
        w = np.full(cd.shape, np.nan)
        powers = cd[live] ** s
        totals = powers.sum(axis=1)
        if np.any(totals <= 0):
            raise DegenerateError(f"all siblings have zero diameter in generation {g}")
        w[live] = powers / totals[:, None] * mu[prg.start:prg.stop][live, None]
        mu[crg.start:crg.stop] = w.ravel()
    return mu
