"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Monte Carlo criteria pin their operating points (SNR, stop rules, seeds)
here; nothing is tuned at runtime. Two criteria are expected to fail
honestly — the punctured-census mean-direction clause (5) and the low-rate
crossover clause (10) — see the assertion messages; every quantity they
test is still computed and printed faithfully.

Run with ``pytest tests/test_acceptance.py -v -s`` (tens of minutes).
"""

import dataclasses
import json
import math
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from rcldpc.channel import rng_stream
from rcldpc.construction import (
    ConstructionConfig,
    DegreeDistribution,
    packaged_config,
    peg_construct,
    peg_from_degrees,
)
from rcldpc.cycles import (
    ace_of_cycle,
    count_cycles,
    cycle_stats,
    enumerate_cycles_bruteforce,
    graph_girth,
)
from rcldpc.extension import (
    build_candidates,
    extend,
    plan_levels,
    select_ace,
    select_cc,
)
from rcldpc.gf2 import SparseBinaryMatrix, encode, rank_gf2, syndrome, systematize
from rcldpc.harness import (
    SweepConfig,
    arq_policy_from_family,
    awgn_capacity_bits,
    cluster_z_ber,
    run_arq_throughput,
    run_sweep,
)
from rcldpc.puncture import (
    SimPuncturingConfig,
    ace_puncture,
    cc_puncture,
    sim_puncture,
)

from conftest import random_sparse

Z_95_ONE_SIDED = 1.645


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")


def build(config_name: str, seed: int | None = None):
    payload = packaged_config(config_name)
    if seed is not None:
        payload = dict(payload)
        payload["seed"] = seed
    cfg = ConstructionConfig.from_json(payload)
    h = peg_construct(cfg)
    return h


def crossing_db(records, k, target_ber):
    """log-linear interpolation of the SNR where BER crosses target."""
    pts = [(r.snr_db, r.ber(k)) for r in records if r.ber(k) > 0]
    for (x1, b1), (x2, b2) in zip(pts, pts[1:]):
        if b1 >= target_ber >= b2:
            l1, l2, lt = math.log10(b1), math.log10(b2), math.log10(target_ber)
            return x1 + (x2 - x1) * (l1 - lt) / (l1 - l2)
    raise AssertionError(f"BER {target_ber} not bracketed by {pts}")


# ---------------------------------------------------------------------------
# shared fixtures


@pytest.fixture(scope="module")
def code_a_family():
    out = {}
    for seed in (7, 11, 13):
        h = build("codeA.json", seed=seed)
        census = count_cycles(h)
        out[seed] = {
            "h": h,
            "census": census,
            "cc": cc_puncture(h, 500, 200, census=census),
            "ace": ace_puncture(h, 500, 200, census=census),
        }
    g, _ = systematize(out[7]["h"])
    out["gen7"] = g
    return out


@pytest.fixture(scope="module")
def code_c_assets():
    h = build("codeC.json")
    g, _ = systematize(h)
    census = count_cycles(h)
    plan = plan_levels(1000, 500, ["5/12", "5/13", "5/14"])
    spec = packaged_config("ext_candidates_b100.json")
    dists = [DegreeDistribution.from_pairs(d["mu"], d["nu"]) for d in spec["distributions"]]
    cands = build_candidates(plan, spec["d_v_max"], spec["d_c_max"], dists,
                             seed=5, invertible_only=True)
    ladders = {
        "cc": extend(h, select_cc(cands).h, plan),
        "ace": extend(h, select_ace(cands).h, plan),
        "rnd": extend(h, _random_hext(plan.b, 99), plan),
    }
    return {
        "h": h, "g": g, "census": census, "plan": plan, "cands": cands,
        "ladders": ladders,
        "ace_pattern": ace_puncture(h, g.k, 200, census=census),
        "dists": dists,
    }


def _random_hext(b, seed):
    """Uncurated control submatrix: random degree-3 columns, patched to
    full rank; deliberately no cycle conditioning."""
    for attempt in range(50):
        rng = rng_stream(seed, attempt)
        rows = [[] for _ in range(b)]
        for j in range(b):
            for r in rng.choice(b, size=3, replace=False):
                rows[int(r)].append(j)
        h = SparseBinaryMatrix.from_entries(b, b, rows)
        extra = 0
        while rank_gf2(h) < b and extra < 3 * b:
            r = int(rng.integers(b))
            c = int(rng.integers(b))
            if c not in h.row(r):
                rows[r].append(c)
                h = SparseBinaryMatrix.from_entries(b, b, rows)
            extra += 1
        if rank_gf2(h) == b:
            return h
    raise RuntimeError("no invertible control found")


# ---------------------------------------------------------------------------
# criteria


def test_criterion_01_cycle_count_oracle_equivalence():
    """Message-passing counts equal brute force at g, g+2, g+4 exactly."""
    rng = np.random.default_rng(11)
    checked = 0
    trials = 0
    while checked < 50:
        trials += 1
        assert trials < 500
        n = int(rng.integers(6, 31))
        m = int(rng.integers(3, max(4, n // 2 + 1)))
        h = random_sparse(rng, m, n, float(rng.uniform(0.12, 0.4)))
        g = graph_girth(h)
        if g is None:
            continue
        checked += 1
        census = count_cycles(h)
        cycles = enumerate_cycles_bruteforce(h, g + 4)
        for c in census.lengths:
            node = np.zeros(n, dtype=np.int64)
            for cy in cycles:
                if len(cy) == c:
                    for u in cy:
                        if u < n:
                            node[u] += 1
            assert np.array_equal(census.node_counts(c), node), (c, h.to_dense())
            assert census.total(c) == sum(1 for cy in cycles if len(cy) == c)
    # PEG codes up to N = 40
    mu = [[0.3, 2], [0.4, 1], [0.3, 3]]
    for n, mm, seed in ((24, 12, 0), (32, 16, 1), (40, 20, 2)):
        dist = DegreeDistribution.from_pairs(mu, [[1.0, 4]])
        h = peg_construct(ConstructionConfig(n=n, m=mm, distribution=dist,
                                             seed=seed, check_rate=False))
        census = count_cycles(h)
        cycles = enumerate_cycles_bruteforce(h, census.girth + 4)
        for c in census.lengths:
            node = np.zeros(n, dtype=np.int64)
            for cy in cycles:
                if len(cy) == c:
                    for u in cy:
                        if u < n:
                            node[u] += 1
            assert np.array_equal(census.node_counts(c), node)
    report("1", True, f"{checked} random graphs (N<=30) + 3 PEG codes up to N=40, exact at g, g+2, g+4")


def test_criterion_02_gf2_soundness(code_a_family, code_c_assets):
    """G·H^T = 0 bitwise and 1000 random-message syndromes per corpus code."""
    corpus = [("codeA", code_a_family[7]["h"], code_a_family["gen7"]),
              ("codeC", code_c_assets["h"], code_c_assets["g"])]
    lad = code_c_assets["ladders"]["ace"]
    for lvl in range(1, lad.plan.num_blocks + 1):
        corpus.append((f"ext_l{lvl}", lad.matrix_at(lvl), lad.generator_at(lvl)))
    for name in ("ref_n800_r0625.json", "mother_n700_r57.json", "mother_n1400_r514.json"):
        h = build(name)
        g, _ = systematize(h)
        corpus.append((name.split(".")[0], h, g))
    rng = np.random.default_rng(3)
    for name, h, g in corpus:
        msgs = rng.integers(0, 2, size=(1000, g.k)).astype(np.uint8)
        # vectorised encode: systematic part via one matmul
        par = (msgs.astype(np.int64) @ g.parity_block.astype(np.int64)) & 1
        words = np.zeros((1000, g.n), dtype=np.uint8)
        words[:, g.msg_positions] = msgs
        words[:, g.parity_positions] = par.astype(np.uint8)
        dense = h.to_dense().astype(np.int64)
        syn = (words.astype(np.int64) @ dense.T) & 1
        assert not syn.any(), f"{name}: nonzero syndrome"
        # spot-check the scalar encoder agrees with the vectorised one
        assert np.array_equal(encode(g, msgs[0]), words[0])
    report("2", True, f"{len(corpus)} codes x 1000 random messages, zero syndromes, G·H^T = 0")


def test_criterion_03_rate_arithmetic(code_a_family):
    h = code_a_family[7]["h"]
    census = code_a_family[7]["census"]
    for p in (50, 100, 150, 200):
        pat = cc_puncture(h, 500, p, census=census)
        assert pat.resulting_rate == Fraction(500, 1000 - p)
        assert pat.puncturing_rate == Fraction(p, 1000)
    plan = plan_levels(1000, 500, ["5/12", "5/13", "5/14"])
    assert plan.num_targets == 3
    assert plan.b == 100
    for t, lvl in zip(plan.targets, plan.levels):
        assert plan.rate_at_block(lvl) == t
    report("3", True, "R' = K/(N-P) exact for P in {50,100,150,200}; plan(5/12,5/13,5/14) -> L=3, B=100")


def test_criterion_04_cc_reduction(code_a_family):
    reductions = []
    for seed in (7, 11, 13):
        assets = code_a_family[seed]
        h, census = assets["h"], assets["census"]
        g = census.girth
        keep = sorted(set(range(h.cols)) - set(assets["cc"].indices))
        res = count_cycles(h.submatrix_cols(keep), lengths=(g,))
        red = 1.0 - res.total(g) / census.total(g)
        reductions.append(red)
    ok = all(r >= 0.25 for r in reductions)
    report("4", ok, "girth-cycle reduction by CC puncturing: "
           + ", ".join(f"{r:.0%}" for r in reductions) + " (all >= 25% required)")
    assert ok


def test_criterion_05_cross_trend(code_a_family):
    both = 0
    details = []
    for seed in (7, 11, 13):
        assets = code_a_family[seed]
        h, census = assets["h"], assets["census"]
        g = census.girth
        res = {}
        for scheme in ("cc", "ace"):
            keep = sorted(set(range(h.cols)) - set(assets[scheme].indices))
            res[scheme] = count_cycles(h.submatrix_cols(keep), lengths=(g,))
        n_cc, n_ace = res["cc"].total(g), res["ace"].total(g)
        mu_cc = cycle_stats(res["cc"], 800, g, population="on_cycle").mean
        mu_ace = cycle_stats(res["ace"], 800, g, population="on_cycle").mean
        clause1 = n_cc < n_ace
        clause2 = mu_ace < mu_cc
        both += clause1 and clause2
        details.append(
            f"seed {seed}: N_g cc={n_cc} ace={n_ace} ({'ok' if clause1 else 'no'}), "
            f"mu_on ace={mu_ace:.2f} cc={mu_cc:.2f} ({'ok' if clause2 else 'no'})"
        )
    ok = both >= 2
    report("5", ok, "; ".join(details) + f" -> {both}/3 seeds satisfy both")
    assert ok, (
        "cycle-count direction holds on every seed but the mean direction "
        "cannot: per-node residual counts are bounded by mother counts and "
        "CC removes exactly the highest-count nodes, so CC survivors always "
        "average fewer girth cycles than ACE survivors (see decisions ledger)"
    )


def test_criterion_06_scheme_ordering(code_a_family):
    h = code_a_family[7]["h"]
    g = code_a_family["gen7"]
    census = code_a_family[7]["census"]
    cc = code_a_family[7]["cc"]
    ace = code_a_family[7]["ace"]
    sim_cfg = SimPuncturingConfig(q=50, snr_grid_db=(2.0, 2.5, 3.0),
                                  repetitions=4, training_bits=1000,
                                  seed=1, max_iters=60)
    sim_pat, _ = sim_puncture(h, g, g.k, 200, sim_cfg)
    # 500 frame errors per scheme (the criterion floor is 200): the CC/ACE
    # separation on this construction is real but modest, so the test buys
    # the extra resolution rather than calling a coin flip significant
    cfg = SweepConfig(snr_grid_db=(3.3,), max_iters=60, min_frame_errors=500,
                      max_frames=2_000_000, seed=2025)
    recs = {}
    for name, pat in (("ace", ace), ("cc", cc), ("sim", sim_pat)):
        recs[name] = run_sweep(h, g, cfg, pattern=pat, label=name).records[0]
    bers = {name: r.ber(g.k) for name, r in recs.items()}
    z_cc = cluster_z_ber(recs["ace"], recs["cc"], g.k)    # >0: ace better
    z_sim = cluster_z_ber(recs["ace"], recs["sim"], g.k)
    ok = (bers["ace"] < bers["cc"] and z_cc >= Z_95_ONE_SIDED
          and bers["ace"] <= bers["sim"] and z_sim >= -Z_95_ONE_SIDED)
    report("6", ok,
           f"3.3 dB, >=200 frame errors: BER ace={bers['ace']:.2e} "
           f"cc={bers['cc']:.2e} (z={z_cc:.1f}) sim(Q=50)={bers['sim']:.2e} "
           f"(z={z_sim:.1f}); need ace<cc at 95% and ace<=sim")
    assert ok


def test_criterion_07_punctured_vs_fresh_gap(code_a_family):
    h = code_a_family[7]["h"]
    g = code_a_family["gen7"]
    ace = code_a_family[7]["ace"]
    h8 = build("ref_n800_r0625.json")
    g8, _ = systematize(h8)
    cfg_p = SweepConfig(snr_grid_db=(2.7, 2.9, 3.1), max_iters=60,
                        min_frame_errors=100, max_frames=150_000, seed=6)
    cfg_f = SweepConfig(snr_grid_db=(2.4, 2.6, 2.8), max_iters=60,
                        min_frame_errors=100, max_frames=150_000, seed=6)
    rep_p = run_sweep(h, g, cfg_p, pattern=ace, label="ace-punctured")
    rep_f = run_sweep(h8, g8, cfg_f, label="fresh-0.625")
    x_p = crossing_db(rep_p.records, g.k, 1e-4)
    x_f = crossing_db(rep_f.records, g8.k, 1e-4)
    gap = x_p - x_f
    ok = gap <= 0.5
    report("7", ok, f"BER=1e-4 at {x_p:.2f} dB (ACE-punctured 5/8) vs "
           f"{x_f:.2f} dB (fresh N=800 R=5/8): gap {gap:.2f} dB <= 0.5")
    assert ok


def test_criterion_08_extension_correctness(code_c_assets):
    plan = code_c_assets["plan"]
    checked = 0
    for name, lad in code_c_assets["ladders"].items():
        for lvl in range(1, plan.num_blocks + 1):
            hl = lad.matrix_at(lvl)
            hp = lad.matrix_at(lvl - 1)
            # leading-block embedding
            assert hl.row_ptr[hp.rows] == hp.row_ptr[hp.rows]
            assert np.array_equal(hl.row_idx[: hp.num_entries], hp.row_idx)
            # no 4-cycle with all edges in the new rows outside h_ext:
            # supports of two new rows intersect in at most one old column
            for r1 in range(hp.rows, hl.rows):
                c1 = set(int(c) for c in hl.row(r1) if c < hp.cols)
                for r2 in range(r1 + 1, hl.rows):
                    c2 = set(int(c) for c in hl.row(r2) if c < hp.cols)
                    assert len(c1 & c2) <= 1
            # exact rate
            gl = lad.generator_at(lvl)
            assert Fraction(gl.k, hl.cols) == plan.rate_at_block(lvl)
            checked += 1
        for target, lvl in zip(plan.targets, plan.levels):
            assert Fraction(lad.generator_at(lvl).k, lad.matrix_at(lvl).cols) == target
    report("8", True, f"{checked} ladder levels: embedding, no new 4-cycles outside h_ext, exact rates")


def test_criterion_09_extension_ordering(code_c_assets):
    plan = code_c_assets["plan"]
    lvl = plan.levels[plan.targets.index(Fraction(5, 13))]
    cfg = SweepConfig(snr_grid_db=(1.6,), max_iters=100, min_frame_errors=200,
                      max_frames=120_000, seed=17)
    recs = {}
    for name in ("ace", "cc", "rnd"):
        lad = code_c_assets["ladders"][name]
        recs[name] = run_sweep(lad.matrix_at(lvl), lad.generator_at(lvl),
                               cfg, label=f"{name}-ext").records[0]
    k = code_c_assets["g"].k
    bers = {n: r.ber(k) for n, r in recs.items()}
    z_cc = cluster_z_ber(recs["ace"], recs["cc"], k)
    z_rnd_ace = cluster_z_ber(recs["ace"], recs["rnd"], k)
    z_rnd_cc = cluster_z_ber(recs["cc"], recs["rnd"], k)
    ok = (bers["ace"] <= bers["cc"] or z_cc >= -Z_95_ONE_SIDED) and \
         bers["ace"] < bers["rnd"] and z_rnd_ace >= Z_95_ONE_SIDED and \
         bers["cc"] < bers["rnd"] and z_rnd_cc >= Z_95_ONE_SIDED
    report("9", ok,
           f"rate 5/13 at 1.6 dB: BER ace={bers['ace']:.2e} cc={bers['cc']:.2e} "
           f"rnd={bers['rnd']:.2e}; ace<=cc (z={z_cc:.1f}), both beat the "
           f"random-submatrix control (z={z_rnd_ace:.1f}, {z_rnd_cc:.1f})")
    assert ok


def test_criterion_10_crossover(code_c_assets):
    hc = code_c_assets["h"]
    gc = code_c_assets["g"]
    ace_c = code_c_assets["ace_pattern"]
    dists = code_c_assets["dists"]
    # rate 5/8: puncturing-derived vs extension of the N=700 R=5/7 mother
    h7 = build("mother_n700_r57.json")
    plan7 = plan_levels(700, 200, ["5/8"])
    cands7 = build_candidates(plan7, 7, 30, dists[:2], seed=5, invertible_only=True)
    lad7 = extend(h7, select_ace(cands7).h, plan7)
    cfg_h = SweepConfig(snr_grid_db=(2.8,), max_iters=100, min_frame_errors=150,
                        max_frames=200_000, seed=23)
    rec_p8 = run_sweep(hc, gc, cfg_h, pattern=ace_c, label="punct-5/8").records[0]
    rec_e8 = run_sweep(lad7.matrix_at(1), lad7.generator_at(1), cfg_h,
                       label="ext-5/8").records[0]
    z_high = cluster_z_ber(rec_p8, rec_e8, 500)  # >0: puncturing better

    # rate 5/13: extension of code C vs puncturing of the N=1400 mother
    h14 = build("mother_n1400_r514.json")
    g14, _ = systematize(h14)
    ace14 = ace_puncture(h14, g14.k, 100, census=count_cycles(h14))
    lvl = code_c_assets["plan"].levels[code_c_assets["plan"].targets.index(Fraction(5, 13))]
    lad = code_c_assets["ladders"]["ace"]
    cfg_l = SweepConfig(snr_grid_db=(1.8,), max_iters=100, min_frame_errors=150,
                        max_frames=200_000, seed=23)
    rec_p13 = run_sweep(h14, g14, cfg_l, pattern=ace14, label="punct-5/13").records[0]
    rec_e13 = run_sweep(lad.matrix_at(lvl), lad.generator_at(lvl), cfg_l,
                        label="ext-5/13").records[0]
    z_low = cluster_z_ber(rec_e13, rec_p13, 500)  # >0: extension better

    high_ok = rec_p8.ber(500) < rec_e8.ber(500) and z_high >= Z_95_ONE_SIDED
    low_ok = rec_e13.ber(500) < rec_p13.ber(500) and z_low >= Z_95_ONE_SIDED
    report("10", high_ok and low_ok,
           f"5/8 @2.8dB: punct={rec_p8.ber(500):.2e} ext={rec_e8.ber(500):.2e} "
           f"(z={z_high:.1f}, puncturing better: {'ok' if high_ok else 'no'}); "
           f"5/13 @1.8dB: ext={rec_e13.ber(500):.2e} punct={rec_p13.ber(500):.2e} "
           f"(z={z_low:.1f}, extension better: {'ok' if low_ok else 'no'})")
    assert high_ok and low_ok, (
        "the high-rate ordering holds; the low-rate reversal does not "
        "materialise against this N=1400 R=5/14 mother (its construction is "
        "unspecified in the source material and a lightly punctured long "
        "mother stays ahead of the 3-level extension at every measured SNR; "
        "see decisions ledger)"
    )


def test_criterion_11_throughput(code_c_assets):
    lad = code_c_assets["ladders"]["ace"]
    policy = arq_policy_from_family(code_c_assets["h"], [code_c_assets["ace_pattern"]],
                                    ladder=lad, max_transmissions=2)
    cfg = SweepConfig(snr_grid_db=(-2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0),
                      max_iters=60, min_frame_errors=40, max_frames=1500,
                      seed=8, snr_is_es=True)
    rep = run_arq_throughput(policy, cfg)
    tputs = [r.throughput for r in rep.records]
    top_rate = policy.stages[0].rate
    cap_ok = all(
        t <= min(awgn_capacity_bits(r.snr_db), top_rate) + 1e-12
        for t, r in zip(tputs, rep.records)
    )
    drops = sum(1 for a, b in zip(tputs, tputs[1:]) if b < a - 1e-12)
    approaches = tputs[-1] >= 0.98 * top_rate
    ok = cap_ok and drops <= 1 and approaches
    report("11", ok,
           f"throughput {['%.3f' % t for t in tputs]} vs top rate {top_rate:.3f}: "
           f"capacity-bounded {cap_ok}, non-monotone steps {drops} (<=1), "
           f"reaches {tputs[-1] / top_rate:.1%} of ladder top")
    assert ok


def test_criterion_12_determinism(tmp_path, code_a_family):
    h = code_a_family[7]["h"]
    g = code_a_family["gen7"]
    pat = code_a_family[7]["ace"]
    base = SweepConfig(snr_grid_db=(2.0, 3.0), max_iters=30, min_frame_errors=20,
                       max_frames=2048, seed=99)
    rep1 = run_sweep(h, g, base, pattern=pat)
    rep2 = run_sweep(h, g, base, pattern=pat)
    rep3 = run_sweep(h, g, dataclasses.replace(base, workers=2), pattern=pat)
    rep4 = run_sweep(h, g, dataclasses.replace(base, workers=3), pattern=pat)
    same_records = rep1.records == rep2.records == rep3.records == rep4.records
    # full CLI pipeline, byte-identical artifacts across reruns
    cfg_path = tmp_path / "cfg.json"
    payload = packaged_config("codeA.json")
    payload["N"], payload["M"] = 120, 60
    cfg_path.write_text(json.dumps(payload))

    def pipeline(d, workers):
        d.mkdir()
        env_cmd = [sys.executable, "-m", "rcldpc.cli"]
        subprocess.run(env_cmd + ["construct", "--config", str(cfg_path),
                                  "--out", str(d / "h.alist")], check=True,
                       capture_output=True)
        subprocess.run(env_cmd + ["puncture", "--alist", str(d / "h.alist"),
                                  "--scheme", "ace", "-P", "12",
                                  "--out", str(d / "p.json")], check=True,
                       capture_output=True)
        subprocess.run(env_cmd + ["simulate", "--alist", str(d / "h.alist"),
                                  "--pattern", str(d / "p.json"),
                                  "--snr-grid", "2.0,4.0",
                                  "--stop-frame-errors", "10",
                                  "--max-frames", "512", "--seed", "5",
                                  "--workers", str(workers),
                                  "--out", str(d / "r.csv")], check=True,
                       capture_output=True)
        return ((d / "h.alist").read_bytes(), (d / "p.json").read_bytes(),
                (d / "r.csv").read_bytes())

    a = pipeline(tmp_path / "a", 1)
    b = pipeline(tmp_path / "b", 2)
    ok = same_records and a == b
    report("12", ok, "reruns and worker counts 1/2/3 byte-identical "
           f"(in-process {same_records}, CLI pipeline {a == b})")
    assert ok
