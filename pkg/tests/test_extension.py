from fractions import Fraction

import numpy as np
import pytest

from rcldpc.construction import DegreeDistribution
from rcldpc.cycles import (
    ace_of_cycle,
    count_cycles,
    enumerate_cycles_bruteforce,
    girth,
)
from rcldpc.extension import (
    ExtensionPlanError,
    ExtensionRankError,
    SubmatrixCandidate,
    build_candidates,
    extend,
    load_ladder,
    plan_levels,
    save_ladder,
    select_ace,
    select_cc,
)
from rcldpc.gf2 import SparseBinaryMatrix, encode, syndrome


# ---------------------------------------------------------------------------
# planning


def test_plan_published_targets():
    plan = plan_levels(1000, 500, ["5/12", "5/13", "5/14"])
    assert plan.num_targets == 3
    assert plan.b == 100
    assert plan.levels == (2, 3, 4)
    for t, lvl in zip(plan.targets, plan.levels):
        assert plan.rate_at_block(lvl) == t


def test_plan_single_target_b_equals_m():
    plan = plan_levels(10, 5, [Fraction(1, 3)])  # K/(N+B) with B = M = 5
    assert plan.num_targets == 1
    assert plan.b == 5
    assert plan.levels == (1,)


def test_plan_non_integer_rate_string_infeasible():
    with pytest.raises(ExtensionPlanError, match="integer"):
        plan_levels(1000, 500, ["5/12", "5/12.5"])


def test_plan_non_integer_block_length():
    with pytest.raises(ExtensionPlanError, match="nearest"):
        plan_levels(1000, 500, ["3/7"])  # 500/(3/7) is not an integer


def test_plan_rejects_bad_orderings():
    with pytest.raises(ExtensionPlanError, match="decreasing"):
        plan_levels(1000, 500, ["5/13", "5/12"])
    with pytest.raises(ExtensionPlanError, match="below"):
        plan_levels(1000, 500, ["5/9"])
    with pytest.raises(ExtensionPlanError, match="no target"):
        plan_levels(1000, 500, [])
    with pytest.raises(ExtensionPlanError, match="float"):
        plan_levels(1000, 500, [0.4])


# ---------------------------------------------------------------------------
# candidates and selection


def cand(girth_val, ng, ace, idx=0, inv=True):
    return SubmatrixCandidate(
        h=SparseBinaryMatrix.from_dense([[1]]), girth=girth_val,
        n_girth_cycles=ng, avg_ace=ace, dist_index=idx, invertible=inv,
    )


def test_select_cc_girth_dominates():
    a, b = cand(6, 10, 1.0, 0), cand(8, 50, 1.0, 1)
    assert select_cc([a, b]) is b


def test_select_cc_fewer_cycles_breaks_tie():
    a, b = cand(8, 50, 1.0, 0), cand(8, 12, 1.0, 1)
    assert select_cc([a, b]) is b


def test_select_cc_index_breaks_full_tie():
    a, b = cand(8, 12, 1.0, 0), cand(8, 12, 9.0, 1)
    assert select_cc([a, b]) is a
    with pytest.raises(ValueError):
        select_cc([])


def test_select_ace_max_alpha():
    cands = [cand(6, 5, 0.0, 0), cand(6, 5, 2.5, 1), cand(6, 5, 1.0, 2)]
    assert select_ace(cands).dist_index == 1


def test_select_ace_all_zero_prefers_girth():
    cands = [cand(6, 5, 0.0, 0), cand(8, 5, 0.0, 1)]
    assert select_ace(cands).dist_index == 1
    with pytest.raises(ValueError):
        select_ace([])


def test_build_candidates_ring_and_bounds():
    plan = plan_levels(12, 8, [Fraction(4, 16)])  # K=4, B=4
    ring = DegreeDistribution.from_pairs([[1.0, 1]], [[1.0, 1]])
    cands = build_candidates(plan, 7, 7, [ring, ring], seed=1)
    # degree-2 regular 4x4 PEG: the single 8-cycle ring
    assert cands[0].girth == 8
    assert cands[0].n_girth_cycles == 1
    # duplicate distributions allowed, selection deterministic
    assert select_cc(cands).dist_index == 0
    with pytest.raises(ValueError, match="S = L\\+1"):
        build_candidates(plan, 7, 7, [ring], seed=1)
    heavy = DegreeDistribution.from_pairs([[1.0, 9]], [[1.0, 9]])
    with pytest.raises(ValueError, match="bounds"):
        build_candidates(plan, 7, 7, [ring, heavy], seed=1)


def test_build_candidates_ace_matches_bruteforce():
    plan = plan_levels(30, 20, [Fraction(10, 40)])  # B = 10
    mix = DegreeDistribution.from_pairs(
        [[0.4, 1], [0.6, 2]], [[0.4, 1], [0.6, 2]]
    )
    cands = build_candidates(plan, 7, 7, [mix, mix], seed=3)
    c = cands[0]
    if c.girth is not None and c.n_girth_cycles:
        cycles = [
            cy for cy in enumerate_cycles_bruteforce(c.h, c.girth)
            if len(cy) == c.girth
        ]
        aces = [ace_of_cycle(cy, c.h) for cy in cycles]
        assert len(cycles) == c.n_girth_cycles
        assert c.avg_ace == pytest.approx(sum(aces) / len(aces))


# ---------------------------------------------------------------------------
# ladder assembly


def small_mother():
    # full-rank 3x7 mother, K=4
    return SparseBinaryMatrix.from_dense(
        [
            [1, 1, 0, 0, 1, 0, 0],
            [0, 1, 1, 0, 0, 1, 0],
            [1, 0, 0, 1, 0, 1, 1],
        ]
    )


def test_extend_b1_smallest_case():
    h = small_mother()
    plan = plan_levels(7, 3, [Fraction(4, 8)])
    assert plan.b == 1
    ladder = extend(h, SparseBinaryMatrix.from_dense([[1]]), plan,
                    spread_coupling=False)
    h1 = ladder.matrix_at(1)
    assert (h1.rows, h1.cols) == (4, 8)
    assert h1.row(3).tolist() == [6, 7]  # coupling one + h_ext one


def test_extend_embedding_and_new_block_structure():
    h = small_mother()
    plan = plan_levels(7, 3, [Fraction(4, 9), Fraction(4, 10)])
    hext = SparseBinaryMatrix.from_dense([[1]])
    ladder = extend(h, hext, plan)
    for lvl in range(1, plan.num_blocks + 1):
        hl = ladder.matrix_at(lvl)
        hp = ladder.matrix_at(lvl - 1)
        assert [hl.row(r).tolist() for r in range(hp.rows)] == [
            hp.row(r).tolist() for r in range(hp.rows)
        ]
        # new rows touch old columns only via the chain coupling and the
        # one spread-window identity entry
        for r in range(hp.rows, hl.rows):
            cols = hl.row(r)
            old = cols[cols < hp.cols]
            assert old.size <= 2
            assert np.sum(old >= hp.cols - plan.b) == 1


def test_extend_no_4cycles_outside_hext():
    rng = np.random.default_rng(0)
    from conftest import random_sparse
    from rcldpc.gf2 import rank_gf2

    while True:
        h = random_sparse(rng, 5, 12, 0.3)
        if rank_gf2(h) == 5:
            break
    plan = plan_levels(12, 5, [Fraction(7, 16), Fraction(7, 20)])
    hext = SparseBinaryMatrix.from_dense(np.eye(4, dtype=np.uint8))
    ladder = extend(h, hext, plan)
    for lvl in range(1, plan.num_blocks + 1):
        hl = ladder.matrix_at(lvl)
        prev_rows = h.rows + (lvl - 1) * plan.b
        # any 4-cycle among the new rows would need two shared columns;
        # couplings are identities so supports intersect in <= 1 column
        for r1 in range(prev_rows, hl.rows):
            for r2 in range(r1 + 1, hl.rows):
                shared = np.intersect1d(hl.row(r1), hl.row(r2))
                assert shared.size <= 1


def test_extend_codeword_embedding_and_rates():
    h = small_mother()
    plan = plan_levels(7, 3, [Fraction(4, 9), Fraction(4, 11)])
    assert plan.b == 2 and plan.levels == (1, 2)
    hext = SparseBinaryMatrix.from_dense([[1, 1], [0, 1]])
    ladder = extend(h, hext, plan)
    rng = np.random.default_rng(1)
    m = rng.integers(0, 2, 4).astype(np.uint8)
    deep = encode(ladder.generator_at(plan.num_blocks), m)
    for lvl in range(plan.num_blocks + 1):
        hl = ladder.matrix_at(lvl)
        gl = ladder.generator_at(lvl)
        assert gl.k == 4
        prefix = deep[: hl.cols]
        assert not syndrome(hl, prefix).any()
        assert np.array_equal(encode(gl, m), prefix)
        assert Fraction(gl.k, hl.cols) == plan.rate_at_block(lvl)


def test_extend_rejects_singular_hext():
    h = small_mother()
    plan = plan_levels(7, 3, [Fraction(4, 9)])
    singular = SparseBinaryMatrix.from_dense([[1, 1], [1, 1]])
    with pytest.raises(ExtensionRankError, match="level 1"):
        extend(h, singular, plan)


def test_extend_dim_checks():
    h = small_mother()
    plan = plan_levels(7, 3, [Fraction(4, 9)])
    with pytest.raises(ValueError, match="2x2"):
        extend(h, SparseBinaryMatrix.from_dense([[1]]), plan)


def test_ladder_roundtrip(tmp_path):
    h = small_mother()
    plan = plan_levels(7, 3, [Fraction(4, 9)])
    ladder = extend(h, SparseBinaryMatrix.from_dense([[1, 1], [0, 1]]), plan)
    d = tmp_path / "ladder"
    save_ladder(ladder, d)
    back = load_ladder(d)
    assert back.plan == ladder.plan
    assert back.mother == ladder.mother
    assert all(a == b for a, b in zip(back.matrices, ladder.matrices))
    assert all(a == b for a, b in zip(back.generators, ladder.generators))
    assert back.level_for_rate("4/9") == 1


def test_ladder_tamper_detection(tmp_path):
    h = small_mother()
    plan = plan_levels(7, 3, [Fraction(4, 9)])
    ladder = extend(h, SparseBinaryMatrix.from_dense([[1, 1], [0, 1]]), plan)
    d = tmp_path / "ladder"
    save_ladder(ladder, d)
    target = d / "level_01.alist"
    target.write_text((d / "mother.alist").read_text())
    with pytest.raises(ValueError, match="hash"):
        load_ladder(d)


def test_girth_floor_invariant():
    h = small_mother()
    plan = plan_levels(7, 3, [Fraction(4, 9), Fraction(4, 10)])
    hext = SparseBinaryMatrix.from_dense([[1]])
    ladder = extend(h, hext, plan)
    g0 = girth(h) or 10**9
    for lvl in range(1, plan.num_blocks + 1):
        gl = girth(ladder.matrix_at(lvl)) or 10**9
        assert gl >= min(g0, 6)
