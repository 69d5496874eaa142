from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moranset import rng
from moranset.errors import CapacityError, InvalidBranchingError, InvalidIndexError, MarkerDomainError, ValidationError
from moranset.families import CANTOR, MENGER, SIERPINSKI
from moranset.index import (
    MultiIndex,
    depth_of,
    format_sigma,
    generation_range,
    generation_size,
    linear_index,
    parse_sigma,
    sigma_of,
)
from moranset.markers import Constant, Coupling, Formula, Random, check_spec, marker_at, ratio_envelope
from moranset.tree import DegenerateGeometryWarning, build_tree


# index algebra ---------------------------------------------------------------


@pytest.mark.parametrize("m,digits,ell", [(2, (1,), 1), (2, (1, 1), 3), (2, (2, 2), 6), (3, (), 0), (20, (20, 20), 420)])
def test_linear_index_examples(m, digits, ell):
    assert linear_index(MultiIndex(digits, m)) == ell
    assert sigma_of(ell, m).digits == digits


@pytest.mark.parametrize("m,n,size", [(2, 2, 6), (3, 1, 3), (20, 2, 420), (2, 0, 0)])
def test_generation_size(m, n, size):
    assert generation_size(m, n) == size


def test_generation_size_rejects_m_below_two():
    with pytest.raises(InvalidBranchingError):
        generation_size(1, 3)


def test_invalid_digit():
    with pytest.raises(InvalidIndexError):
        MultiIndex((1, 3), 2)
    with pytest.raises(InvalidIndexError):
        MultiIndex((0,), 2)


def test_child_recurrence_exhaustive():
    for m in (2, 3, 20):
        for ell in range(0, 10_001 // m):
            sigma = sigma_of(ell, m)
            for j in range(1, m + 1):
                assert linear_index(sigma * j) == m * ell + j


@given(st.integers(2, 25), st.integers(0, 10**6))
def test_sigma_roundtrip(m, ell):
    sigma = sigma_of(ell, m)
    assert sigma.linear_index() == ell
    assert parse_sigma(format_sigma(sigma.digits, m), m) == sigma
    n = sigma.generation()
    assert ell in generation_range(m, n)
    assert int(depth_of(ell, m)) == n


def test_generation_partition():
    for m in (2, 3, 20):
        seen = []
        for n in range(4 if m < 20 else 3):
            r = generation_range(m, n)
            assert len(r) == m**n
            seen.extend(r)
        assert seen == list(range(len(seen)))


def test_concatenation_and_parent():
    s = MultiIndex((1, 2), 3)
    t = MultiIndex((3,), 3)
    assert (s * t).digits == (1, 2, 3)
    assert (s * t).parent() == s


# counter RNG -----------------------------------------------------------------


def _splitmix_reference(z: int) -> int:
    # independent transcription of the published splitmix64 finaliser
    M = (1 << 64) - 1
    z = (z + 0x9E3779B97F4A7C15) & M
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
    return z ^ (z >> 31)


def test_splitmix_known_sequence():
    # first outputs of splitmix64 seeded with 0 (Vigna's reference implementation)
    assert _splitmix_reference(0) == 0xE220A8397B1DCDAF
    assert rng.splitmix64(0) == 0xE220A8397B1DCDAF


@given(st.integers(0, 2**64 - 1), st.integers(0, 2**40), st.integers(0, 5))
def test_counter_scalar_matches_reference(seed, ell, j):
    M = (1 << 64) - 1
    z = (seed + ell * 0x9E3779B97F4A7C15 + j) & M
    expect = (_splitmix_reference(z) >> 11) * 2.0**-53
    assert rng.counter_uniform(seed, ell, j) == expect
    assert 0.0 <= expect < 1.0


def test_counter_array_matches_scalar():
    ells = np.arange(0, 5000, 7, dtype=np.int64)
    for seed in (0, 42, 2**63 + 5):
        for j in range(3):
            arr = rng.counter_uniform_array(seed, ells, j)
            assert arr.tolist() == [rng.counter_uniform(seed, int(e), j) for e in ells]


# markers ---------------------------------------------------------------------


def test_constant_marker():
    assert marker_at(Constant((0.5,) * 6), 7, 3).tolist() == [0.5] * 6


def test_example51_formula_at_zero():
    k = marker_at(Formula("example51"), 0)
    assert k == pytest.approx([1 / 6, 5 / 16], abs=1e-15)


def test_random_coupling_example52():
    spec = Random(7, 2, ((1, 1 / 8, 3 / 8),), (Coupling(2, 1, 0.5, -1.0),))
    K = spec.batch(np.arange(5000))
    assert np.all((K[:, 0] >= 1 / 8) & (K[:, 0] <= 3 / 8))
    assert np.allclose(K[:, 1], 0.5 - K[:, 0], atol=1e-15)
    assert np.array_equal(K, spec.batch(np.arange(5000)))


def test_random_is_pure_function_of_ell():
    spec = Random(99, 2, ((1, 0, 1), (2, 0, 1)))
    whole = spec.batch(np.arange(100))
    parts = np.concatenate([spec.batch(np.arange(100)[::-1])[::-1]])
    assert np.array_equal(whole, parts)
    assert marker_at(spec, 17).tolist() == whole[17].tolist()


def test_random_sorted_pairs_stay_in_domain():
    spec = Random(3, 6, tuple((c, 0.0, 1.0) for c in range(1, 7)), (), ((1, 2), (3, 4), (5, 6)))
    check_spec(spec, MENGER)
    K = spec.batch(np.arange(2000))
    MENGER.validate_markers(K)


def test_random_requires_full_coverage():
    with pytest.raises(ValidationError):
        Random(1, 2, ((1, 0, 0.5),))


def test_check_spec_rejects_out_of_domain():
    with pytest.raises(MarkerDomainError):
        check_spec(Constant((0.7, 0.4, 0.1, 0.2, 0.3, 0.9)), MENGER)
    with pytest.raises(MarkerDomainError):
        check_spec(Random(1, 2, ((1, 0.5, 1.5), (2, 0, 1))), CANTOR)


def test_formula_needs_seed():
    with pytest.raises(ValidationError):
        Formula("sierpinski56")
    k = Formula("sierpinski56", seed=5).batch(np.arange(200), 3)
    SIERPINSKI.validate_markers(k)
    assert np.allclose(k[:, 0] + k[:, 1], 1)


def test_menger510_converges_to_third():
    k = Formula("menger510").batch(np.array([0, 1, 10**6]), 20)
    assert k[0, 0] == pytest.approx(1 / 3 + 1 / 12)
    assert k[1, 0] == pytest.approx(1 / 3 - 1 / 24)
    assert np.allclose(k[2], [1 / 3, 2 / 3] * 3, atol=1e-6)


def test_envelope_example52():
    spec = Random(42, 2, ((1, 1 / 8, 3 / 8),), (Coupling(2, 1, 0.5, -1.0),))
    env = ratio_envelope(spec, CANTOR)
    assert env.t.tolist() == [1 / 8, 1 / 8]
    assert env.r.tolist() == [3 / 8, 3 / 8]
    assert env.u == pytest.approx(0.5, abs=1e-15)


def test_envelope_refuses_formula():
    with pytest.raises(ValidationError):
        ratio_envelope(Formula("example51"), CANTOR)


# tree builder ----------------------------------------------------------------


def test_cantor_generation_two():
    tree = build_tree(CANTOR, [0, 1], Constant((1 / 3, 1 / 3)), 2)
    expect = [[0, 1 / 9], [2 / 9, 1 / 3], [2 / 3, 7 / 9], [8 / 9, 1]]
    assert np.allclose(tree.sets(2), expect, atol=1e-15)


def test_depth_zero_tree():
    tree = build_tree(SIERPINSKI, SIERPINSKI.default_initial_set(), Constant((0.5,) * 6), 0)
    assert len(tree) == 1
    assert np.array_equal(tree.geometry[0], SIERPINSKI.default_initial_set())


def test_menger_generation_one_cubes():
    tree = build_tree(MENGER, MENGER.default_initial_set(), Constant((1 / 3, 2 / 3) * 3), 1)
    P = tree.sets(1)
    assert len(P) == 20
    edges = P[:, 1:] - P[:, :1]
    assert np.allclose(edges, np.eye(3) / 3, atol=1e-15)


def test_tree_children_follow_recurrence():
    tree = build_tree(CANTOR, [0, 1], Formula("example51"), 5)
    for ell in range(1, 31):
        j = 1
        for c in tree.children_of(ell):
            assert c == 2 * ell + j
            j += 1


def test_build_is_schedule_independent():
    spec = Random(11, 6, tuple((c, 0.25, 0.75) for c in range(1, 7)))
    a = build_tree(SIERPINSKI, SIERPINSKI.default_initial_set(), spec, 6)
    b = build_tree(SIERPINSKI, SIERPINSKI.default_initial_set(), spec, 6, workers=4, chunk_size=37)
    assert np.array_equal(a.geometry, b.geometry)
    assert np.array_equal(a.diam, b.diam)


def test_capacity_cap():
    with pytest.raises(CapacityError):
        build_tree(MENGER, MENGER.default_initial_set(), Constant((1 / 3, 2 / 3) * 3), 7)
    with pytest.raises(CapacityError):
        build_tree(CANTOR, [0, 1], Constant((0.3, 0.3)), 5, max_records=16)


def test_degenerate_subtree_halts():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        tree = build_tree(CANTOR, [0, 1], Constant((0.0, 0.5)), 3)
    assert any(issubclass(w.category, DegenerateGeometryWarning) for w in caught)
    assert tree.alive[2] and tree.alive[1]
    assert not tree.alive[3]  # child of the zero-length interval
    assert np.isnan(tree.diam[3])
    assert math.isclose(tree.diam[6], 0.25)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.integers(0, 2**32))
def test_tree_sandwich_and_containment(k1, k2, seed):
    spec = Random(seed, 2, ((1, min(k1, k2), max(k1, k2)), (2, 0.0, 1.0)))
    tree = build_tree(CANTOR, [-2.0, 3.0], spec, 6)
    for ell in range(generation_size(2, 5) + 1):
        P = tree.geometry[ell]
        for j, c in enumerate(tree.children_of(ell)):
            assert CANTOR.contains(P, tree.geometry[c])
            assert abs(tree.diam[c] - tree.markers[ell][j] * tree.diam[ell]) <= 1e-12
