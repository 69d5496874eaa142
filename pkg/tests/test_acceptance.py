"""Acceptance criteria 1-11.

Each check returns (passed, detail); the test prints one line per criterion
and asserts.  Run directly (``python tests/test_acceptance.py``) for the bare
report without pytest.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from moranset.commands import cmd_generate, compute_bounds
from moranset.config import load_config, parse_config
from moranset.dimension import bounds_limit, bounds_mean, bounds_uniform, bounds_vector, moran_root, natural_measure
from moranset.empirics import estimate_dimension
from moranset.families import CANTOR, MENGER, SIERPINSKI, get_family
from moranset.index import generation_size, linear_index, sigma_of
from moranset.markers import Constant, Formula, Random, ratio_envelope
from moranset.tree import build_tree

RESULTS: dict[int, tuple[bool, str]] = {}


# oracles: direct recursive constructions, no use of the tree builder ------------


def cantor_oracle(k: int) -> list[tuple[int, int]]:
    """Generation-k middle-third intervals as integer numerators over 3**k."""
    out = []
    for digits in product((0, 2), repeat=k):
        a = sum(d * 3 ** (k - 1 - i) for i, d in enumerate(digits))
        out.append((a, a + 1))
    return out


def sierpinski_oracle(T, n):
    if n == 0:
        return [T]
    A, B, C = T
    ab, ac, bc = (A + B) / 2, (A + C) / 2, (B + C) / 2
    out = []
    for sub in ((A, ab, ac), (ab, B, bc), (ac, bc, C)):
        out.extend(sierpinski_oracle(np.array(sub), n - 1))
    return out


def menger_oracle(n):
    """Integer lower corners (units of 3**-n) of the generation-n sponge cubes."""
    cubes = [(0, 0, 0)]
    for _ in range(n):
        cubes = [
            (3 * x + a, 3 * y + b, 3 * z + c)
            for x, y, z in cubes
            for a, b, c in product(range(3), repeat=3)
            if (a == 1) + (b == 1) + (c == 1) <= 1
        ]
    return cubes


# criteria -----------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    rep = compute_bounds(load_config("example51"), "limit")
    dt = time.perf_counter() - t0
    ok = abs(rep.lower - 0.5) <= 1e-9 and abs(rep.upper - 0.5) <= 1e-9 and dt < 1
    return ok, f"lower={rep.lower:.12f} upper={rep.upper:.12f} time={dt:.3f}s"


def criterion_2():
    target = math.log(2) / math.log(8 / 3)
    u = bounds_uniform(2, 1 / 8, 3 / 8)
    cfg = load_config("example52")
    env = ratio_envelope(cfg.markers, CANTOR)
    via_cfg = compute_bounds(cfg, "uniform")
    mean = bounds_mean(2, u=0.5)
    mean_cfg = compute_bounds(cfg, "mean")
    ok = (
        abs(u.lower - 1 / 3) <= 1e-4
        and abs(u.upper - target) <= 1e-4
        and abs(via_cfg.lower - u.lower) <= 1e-12
        and abs(via_cfg.upper - u.upper) <= 1e-12
        and abs(env.u - 0.5) <= 1e-15
        and abs(mean.upper - 0.5) <= 1e-9
        and abs(mean_cfg.upper - 0.5) <= 1e-9
    )
    return ok, f"uniform=({u.lower:.6f}, {u.upper:.6f}) target upper {target:.6f}; mean upper={mean_cfg.upper:.12f}"


def criterion_3():
    r = bounds_uniform(3, 0.45, 0.55)
    cfg = compute_bounds(load_config("example54"), "uniform")
    ok = abs(r.lower - 1.3758) <= 1e-3 and abs(r.upper - 1.8377) <= 1e-3
    ok &= abs(cfg.lower - r.lower) <= 1e-12 and abs(cfg.upper - r.upper) <= 1e-12
    return ok, f"({r.lower:.6f}, {r.upper:.6f})"


def criterion_4():
    r = bounds_limit([0.5] * 3, [0.5] * 3)
    cfg = compute_bounds(load_config("example56"), "limit")
    target = math.log(3) / math.log(2)
    ok = all(abs(x - target) <= 1e-9 for x in (r.lower, r.upper, cfg.lower, cfg.upper)) and r.exact
    return ok, f"s={r.lower:.12f} target {target:.12f}"


def criterion_5():
    cfg = load_config("example59")
    rep = compute_bounds(cfg, "vector")
    env = ratio_envelope(cfg.markers, MENGER)
    t_expect = sorted([0.32] * 8 + [0.30] * 12)
    r_expect = sorted([0.35] * 8 + [0.36] * 12)
    vecs_ok = np.allclose(sorted(env.t), t_expect, atol=1e-12) and np.allclose(sorted(env.r), r_expect, atol=1e-12)
    direct = bounds_vector(t_expect, r_expect)
    ok = vecs_ok and abs(rep.lower - 2.546) <= 2e-3 and abs(rep.upper - 2.901) <= 2e-3
    ok &= abs(direct.lower - rep.lower) <= 1e-12 and abs(direct.upper - rep.upper) <= 1e-12
    return ok, f"lower={rep.lower:.6f} upper={rep.upper:.6f} (vectors 8x0.32+12x0.30 / 8x0.35+12x0.36: {vecs_ok})"


def criterion_6():
    r = bounds_limit([1 / 3] * 20, [1 / 3] * 20)
    cfg = compute_bounds(load_config("example510"), "limit")
    target = math.log(20) / math.log(3)
    ok = abs(r.lower - target) <= 1e-4 and abs(cfg.lower - target) <= 1e-4 and abs(cfg.upper - target) <= 1e-4
    return ok, f"s={r.lower:.9f} target {target:.9f}"


def criterion_7():
    t0 = time.perf_counter()
    cfg = load_config("example53")
    tree = cfg.build(n=15)
    worst = 0.0
    partial = Fraction(0)
    for n in range(16):
        r = tree.generation(n)
        total = float(np.sum(tree.diam[r.start:r.stop]))
        expect = 1 - 2 / (3 * math.e) * float(partial)
        worst = max(worst, abs(total - expect))
        partial += Fraction(1, math.factorial(n))
        last = total
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and abs(last - 1 / 3) <= 1e-6 and dt < 1
    return ok, f"max deviation {worst:.2e}, generation-15 length {last:.12f}, time={dt:.3f}s"


def criterion_8():
    details = []
    # Cantor: generation-k endpoints recovered as exact 3-adic numerators
    tree = build_tree(CANTOR, [0, 1], Constant((1 / 3, 1 / 3)), 10)
    cantor_ok = True
    for k in range(11):
        got = tree.sets(k) * 3**k
        ints = np.rint(got).astype(np.int64)
        cantor_ok &= [tuple(x) for x in ints.tolist()] == cantor_oracle(k)
        cantor_ok &= bool(np.max(np.abs(got - ints)) <= 1e-9)
    details.append(f"cantor gen0-10 3-adic match={cantor_ok}")
    # Sierpinski: 3**n triangles, same set as the midpoint recursion, sides 2**-n
    n = 7
    E0 = SIERPINSKI.default_initial_set()
    tris = build_tree(SIERPINSKI, E0, Constant((0.5,) * 6), n).sets(n)
    oracle = np.array(sierpinski_oracle(E0, n))
    key = lambda T: np.lexsort((T.mean(axis=1)[:, 1], T.mean(axis=1)[:, 0]))
    same = np.allclose(tris[key(tris)], oracle[key(oracle)], atol=1e-12)
    sides = np.linalg.norm(tris - np.roll(tris, 1, axis=1), axis=2)
    sierp_ok = len(tris) == 3**n and same and bool(np.max(np.abs(sides - 2.0**-n)) <= 1e-12)
    details.append(f"sierpinski n={n} count={len(tris)} match={sierp_ok}")
    # Menger: 20**n axis-aligned cubes of side 3**-n at the oracle positions
    n = 3
    P = build_tree(MENGER, MENGER.default_initial_set(), Constant((1 / 3, 2 / 3) * 3), n).sets(n)
    edges = P[:, 1:] - P[:, :1]
    cubes_ok = np.allclose(edges, np.eye(3) * 3.0**-n, atol=1e-12)
    corners = sorted(map(tuple, np.rint(P[:, 0] * 3**n).astype(int).tolist()))
    menger_ok = len(P) == 20**n and cubes_ok and corners == sorted(menger_oracle(n))
    details.append(f"menger n={n} count={len(P)} match={menger_ok}")
    return cantor_ok and sierp_ok and menger_ok, "; ".join(details)


def criterion_9():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240909)
    failures = {}
    counts = {}

    # compression containment and diameter sandwich, per family
    cont = sand = cases = 0
    for name in ("cantor", "sierpinski", "menger"):
        fam = get_family(name)
        N = 1000
        if name == "cantor":
            K = rng.uniform(0, 1, (N, 2))
            a = rng.normal(size=N) * 10
            G = np.stack([a, a + rng.uniform(0, 10, N)], axis=1)
        elif name == "sierpinski":
            K = rng.uniform(0, 1, (N, 6))
            G = rng.normal(size=(N, 3, 2)) * rng.uniform(0.1, 10, (N, 1, 1))
        else:
            K = rng.uniform(0, 1, (N, 6))
            K[:, 0::2], K[:, 1::2] = np.minimum(K[:, 0::2], K[:, 1::2]), np.maximum(K[:, 0::2], K[:, 1::2])
            O = rng.normal(size=(N, 1, 3))
            G = np.concatenate([O, O + rng.normal(size=(N, 3, 3))], axis=1)
        kids = fam.children(K, G)
        L, U = fam.ratio_arrays(K)
        dp, dc = fam.diameter(G), fam.diameter(kids)
        for i in range(N):
            for j in range(fam.m):
                cont += not fam.contains(G[i], kids[i, j])
        slack = 1e-12 * np.maximum(dp, 1)[:, None]
        sand += int(np.sum((dc < L * dp[:, None] - slack) | (dc > U * dp[:, None] + slack)))
        cases += N
    failures["containment"], failures["sandwich"] = cont, sand
    counts["containment"] = counts["sandwich"] = cases

    # child-order recurrence on random words
    bad = 0
    for _ in range(1000):
        m = int(rng.integers(2, 21))
        sigma = sigma_of(int(rng.integers(0, 10**9)), m)
        j = int(rng.integers(1, m + 1))
        bad += linear_index(sigma * j) != m * linear_index(sigma) + j
    failures["recurrence"], counts["recurrence"] = bad, 1000

    # natural-measure conservation on random trees
    bad = 0
    for i in range(1000):
        s = float(rng.uniform(0.2, 2.0))
        if i % 2:
            spec = Random(int(rng.integers(0, 2**63)), 2, ((1, 0.05, 0.6), (2, 0.05, 0.6)))
            tree = build_tree(CANTOR, [0, 1], spec, 4)
        else:
            spec = Random(int(rng.integers(0, 2**63)), 6, tuple((c, 0.1, 0.9) for c in range(1, 7)))
            tree = build_tree(SIERPINSKI, SIERPINSKI.default_initial_set(), spec, 3)
        mu = natural_measure(tree, s)
        for g in range(tree.n + 1):
            r = tree.generation(g)
            bad += abs(mu[r.start:r.stop].sum() - 1) > 1e-12
    failures["measure"], counts["measure"] = bad, 1000

    # moran_root monotonicity
    bad = 0
    for _ in range(1000):
        m = int(rng.integers(2, 21))
        t = rng.uniform(0.01, 0.9, m)
        t2 = t + (0.9 - t) * rng.uniform(0, 1, m)
        bad += moran_root(t) > moran_root(t2) + 1e-12
    failures["monotone"], counts["monotone"] = bad, 1000

    dt = time.perf_counter() - t0
    ok = all(v == 0 for v in failures.values()) and all(c >= 1000 for c in counts.values()) and dt < 30
    summary = ", ".join(f"{k} {failures[k]}/{counts[k]}" for k in failures)
    return ok, f"failures: {summary}; time={dt:.2f}s"


def criterion_10():
    tree = build_tree(CANTOR, [0, 1], Constant((1 / 3, 1 / 3)), 12)
    c = estimate_dimension(tree.sets(), [3.0**-k for k in range(2, 8)])
    tree = build_tree(SIERPINSKI, SIERPINSKI.default_initial_set(), Constant((0.5,) * 6), 8)
    s = estimate_dimension(tree.sets(), [2.0**-k for k in range(1, 9)])
    dc = abs(c.slope - math.log(2) / math.log(3))
    ds = abs(s.slope - math.log(3) / math.log(2))
    return dc < 0.05 and ds < 0.08, f"cantor slope {c.slope:.4f} (|d|={dc:.4f}); sierpinski slope {s.slope:.4f} (|d|={ds:.4f})"


def criterion_11(tmp_dir=None):
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory(dir=tmp_dir) as d:
        a, b = Path(d) / "run1.gen", Path(d) / "run2.gen"
        cfg = load_config("example52")
        assert cfg.seed == 42
        cmd_generate(cfg, a)
        cmd_generate(load_config("example52"), b)
        same = a.read_bytes() == b.read_bytes()
        size = a.stat().st_size
    return same, f"byte-identical={same} ({size} bytes)"


CHECKS = {i: globals()[f"criterion_{i}"] for i in range(1, 12)}


def report_line(i: int, ok: bool, detail: str) -> str:
    return f"criterion {i:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number):
    ok, detail = CHECKS[number]()
    RESULTS[number] = (ok, detail)
    print(report_line(number, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for i, check in CHECKS.items():
        print(report_line(i, *check()), flush=True)
