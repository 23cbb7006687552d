import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcldpc.cycles import (
    InvalidCycleError,
    ace_of_cycle,
    ace_profile,
    census_to_json,
    count_cycles,
    cycle_stats,
    enumerate_cycles_bruteforce,
    girth,
)
from rcldpc.gf2 import SparseBinaryMatrix

from conftest import random_sparse

ALL_ONES = SparseBinaryMatrix.from_dense([[1, 1], [1, 1]])
TWO_SQUARES = SparseBinaryMatrix.from_dense(
    [[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]]
)
RING6 = SparseBinaryMatrix.from_dense(  # 3x3 circulant, row degree 2
    [[1, 1, 0], [0, 1, 1], [1, 0, 1]]
)


def brute_per_node(h, cycles, c):
    node = np.zeros(h.cols, dtype=np.int64)
    ace = np.zeros(h.cols, dtype=np.int64)
    for cy in cycles:
        if len(cy) != c:
            continue
        a = ace_of_cycle(cy, h)
        for u in cy:
            if u < h.cols:
                node[u] += 1
                ace[u] += a
    return node, ace


# ---------------------------------------------------------------------------
# girth


def test_girth_all_ones_is_4():
    assert girth(ALL_ONES) == 4


def test_girth_single_row_acyclic():
    h = SparseBinaryMatrix.from_entries(1, 5, [[0, 1, 2, 3, 4]])
    assert girth(h) is None


def test_girth_ring6():
    assert girth(RING6) == 6


# ---------------------------------------------------------------------------
# counting


def test_count_all_ones():
    cen = count_cycles(ALL_ONES)
    assert cen.girth == 4
    assert cen.total(4) == 1
    assert cen.node_counts(4).tolist() == [1, 1]
    assert cen.total(6) == 0 and cen.total(8) == 0


def test_count_disjoint_squares_additive():
    cen = count_cycles(TWO_SQUARES)
    assert cen.girth == 4
    assert cen.total(4) == 2
    assert cen.node_counts(4).tolist() == [1, 1, 1, 1]


def test_count_acyclic_marker():
    h = SparseBinaryMatrix.from_entries(1, 4, [[0, 1, 2, 3]])
    cen = count_cycles(h)
    assert cen.girth is None
    assert cen.lengths == ()
    assert cen.total(6) == 0
    assert cen.node_counts(8).tolist() == [0, 0, 0, 0]


def test_count_length_out_of_range():
    with pytest.raises(NotImplementedError):
        count_cycles(RING6, lengths=(14,))  # girth 6: beyond 2g-2 and != 2g


def test_count_vs_bruteforce_random_15x30():
    rng = np.random.default_rng(123)
    checked = 0
    while checked < 8:
        h = random_sparse(rng, 15, 30, 0.12)
        g = girth(h)
        if g is None:
            continue
        checked += 1
        cen = count_cycles(h)
        cycles = enumerate_cycles_bruteforce(h, g + 4)
        for c in cen.lengths:
            node, ace = brute_per_node(h, cycles, c)
            assert cen.total(c) == sum(1 for cy in cycles if len(cy) == c)
            assert np.array_equal(cen.node_counts(c), node)
            assert np.array_equal(cen.ace_sums[c], ace)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_count_matches_bruteforce_property(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 8))
    n = int(rng.integers(4, 14))
    h = random_sparse(rng, m, n, float(rng.uniform(0.2, 0.6)))
    g = girth(h)
    if g is None:
        assert count_cycles(h).lengths == ()
        return
    cen = count_cycles(h)
    cycles = enumerate_cycles_bruteforce(h, g + 4)
    for c in cen.lengths:
        node, _ = brute_per_node(h, cycles, c)
        assert np.array_equal(cen.node_counts(c), node)


def test_incidence_identity():
    rng = np.random.default_rng(7)
    h = random_sparse(rng, 10, 20, 0.2)
    cen = count_cycles(h)
    for c in cen.lengths:
        assert cen.node_counts(c).sum() == (c // 2) * cen.total(c)


def test_edge_deletion_monotone():
    rng = np.random.default_rng(5)
    h = random_sparse(rng, 8, 16, 0.3)
    cen = count_cycles(h)
    if cen.girth is None:
        pytest.skip("acyclic draw")
    g = cen.girth
    # drop one edge: remove an entry from the densest row
    r = int(np.argmax(h.row_degrees()))
    rows = [list(h.row(i)) for i in range(h.rows)]
    rows[r] = rows[r][1:]
    h2 = SparseBinaryMatrix.from_entries(h.rows, h.cols, rows)
    g2 = girth(h2)
    if g2 is None:
        assert True
        return
    cen2 = count_cycles(h2, lengths=[c for c in cen.lengths if c >= g2 or c < g2])
    for c in cen.lengths:
        if c >= g2:
            assert cen2.total(c) <= cen.total(c)


# ---------------------------------------------------------------------------
# brute force oracle


def test_bruteforce_all_ones():
    cycles = enumerate_cycles_bruteforce(ALL_ONES, 4)
    assert len(cycles) == 1 and len(cycles[0]) == 4


def test_bruteforce_ring6():
    cycles = enumerate_cycles_bruteforce(RING6, 8)
    assert [len(c) for c in cycles] == [6]


def test_bruteforce_empty():
    h = SparseBinaryMatrix.from_entries(2, 3, [[], []])
    assert enumerate_cycles_bruteforce(h, 8) == []


def test_bruteforce_bound():
    h = SparseBinaryMatrix.from_entries(1, 41, [[0]])
    with pytest.raises(ValueError, match="bound"):
        enumerate_cycles_bruteforce(h, 4)


def test_bruteforce_unique_up_to_symmetry():
    rng = np.random.default_rng(3)
    h = random_sparse(rng, 6, 10, 0.4)
    cycles = enumerate_cycles_bruteforce(h, 8)
    canon = set()
    for cy in cycles:
        k = len(cy)
        rots = [tuple(cy[i:] + cy[:i]) for i in range(k)]
        rev = tuple(reversed(cy))
        rots += [tuple(rev[i:] + rev[:i]) for i in range(k)]
        key = min(rots)
        assert key not in canon
        canon.add(key)


# ---------------------------------------------------------------------------
# ACE


def test_ace_zero_for_degree_2_cycle():
    assert ace_of_cycle((0, 2, 1, 3), ALL_ONES) == 0


def test_ace_mixed_degrees():
    # 4-cycle through a degree-3 and a degree-4 variable
    h = SparseBinaryMatrix.from_dense(
        [
            [1, 1, 0, 0],
            [1, 1, 0, 0],
            [1, 0, 1, 0],
            [0, 1, 0, 1],
            [1, 0, 0, 0],
        ]
    )
    # vars 0 (degree 4) and 1 (degree 3) share checks 0 and 1
    assert ace_of_cycle((0, 4, 1, 5), h) == 3


def test_ace_six_cycle_degree_2():
    assert ace_of_cycle((0, 3, 1, 4, 2, 5), RING6) == 0


def test_ace_invalid_cycles():
    with pytest.raises(InvalidCycleError):
        ace_of_cycle((0, 2, 1), ALL_ONES)  # odd length
    with pytest.raises(InvalidCycleError):
        ace_of_cycle((0, 2, 0, 3), ALL_ONES)  # repeated vertex
    with pytest.raises(InvalidCycleError):
        ace_of_cycle((0, 1, 2, 3), ALL_ONES)  # does not alternate


def test_ace_profile_all_ones():
    cen = count_cycles(ALL_ONES)
    prof = ace_profile(ALL_ONES, cen)
    assert prof.alpha[4].tolist() == [0.0, 0.0]
    assert prof.alpha_min.tolist() == [0.0, 0.0]


def test_ace_profile_explicit_mixed_graph():
    # node v=0 lies on one 4-cycle of ACE 3 and one 6-cycle of ACE 0
    h = SparseBinaryMatrix.from_entries(
        6, 4, [[0, 1, 2], [0, 1, 3], [2, 3], [1], [1], [1]]
    )
    cycles = enumerate_cycles_bruteforce(h, 8)
    four = [c for c in cycles if len(c) == 4 and 0 in c]
    six = [c for c in cycles if len(c) == 6 and 0 in c]
    assert len(four) == 1 and ace_of_cycle(four[0], h) == 3
    assert len(six) == 1 and ace_of_cycle(six[0], h) == 0
    cen = count_cycles(h)
    prof = ace_profile(h, cen)
    assert prof.alpha[4][0] == 3.0
    assert prof.alpha[6][0] == 0.0
    assert prof.alpha_min[0] == 0.0


def test_ace_profile_regular_code_is_flat(small_peg):
    h, _ = small_peg
    cen = count_cycles(h)
    prof = ace_profile(h, cen)
    g = cen.girth
    defined = prof.alpha[g][~np.isnan(prof.alpha[g])]
    assert defined.size > 0
    assert np.allclose(defined, defined[0])


def test_ace_profile_undefined_marker():
    # variable 4 hangs off a tree branch: no cycles through it
    h = SparseBinaryMatrix.from_entries(3, 5, [[0, 1], [0, 1, 4], [2, 3]])
    cen = count_cycles(h)
    prof = ace_profile(h, cen)
    assert np.isnan(prof.alpha_min[4])
    assert np.isnan(prof.alpha_min[2])
    assert not np.isnan(prof.alpha_min[0])


# ---------------------------------------------------------------------------
# stats and export


def test_stats_all_ones():
    cen = count_cycles(ALL_ONES)
    st_ = cycle_stats(cen, 2, 4)
    assert (st_.total, st_.mean, st_.std) == (1, 1.0, 0.0)


def test_stats_disjoint():
    cen = count_cycles(TWO_SQUARES)
    st_ = cycle_stats(cen, 4, 4)
    assert (st_.total, st_.mean, st_.std) == (2, 1.0, 0.0)


def test_stats_population_conventions():
    # one square plus two isolated-ish columns
    h = SparseBinaryMatrix.from_dense(
        [[1, 1, 0, 0], [1, 1, 1, 0], [0, 0, 0, 1]]
    )
    cen = count_cycles(h)
    all_st = cycle_stats(cen, 4, 4, population="all")
    on_st = cycle_stats(cen, 4, 4, population="on_cycle")
    assert all_st.mean == pytest.approx(2 * 1 / 4)
    assert on_st.mean == pytest.approx(1.0)
    with pytest.raises(ValueError):
        cycle_stats(cen, 4, 4, population="nope")


def test_census_json_shape(tmp_path):
    cen = count_cycles(ALL_ONES)
    out = census_to_json(cen)
    assert out["girth"] == 4
    assert out["lengths"]["4"]["N_c"] == 1
    assert len(out["per_node"]) == 2
