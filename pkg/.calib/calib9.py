import numpy as np, time, warnings
warnings.simplefilter("ignore")
from fractions import Fraction
from rcldpc.construction import ConstructionConfig, DegreeDistribution, peg_construct, packaged_config, graph_girth
from rcldpc.gf2 import systematize, rank_gf2, SparseBinaryMatrix
from rcldpc.extension import plan_levels, build_candidates, select_cc, select_ace, extend
from rcldpc.harness import SweepConfig, run_sweep, cluster_z_ber
from rcldpc.channel import rng_stream

def random_hext(b, seed):
    for attempt in range(50):
        rng = rng_stream(seed, attempt)
        rows = [[] for _ in range(b)]
        for j in range(b):
            for r in rng.choice(b, size=3, replace=False):
                rows[int(r)].append(j)
        hh = SparseBinaryMatrix.from_entries(b, b, rows)
        extra = 0
        while rank_gf2(hh) < b and extra < 3 * b:
            r = int(rng.integers(b)); c = int(rng.integers(b))
            if c not in hh.row(r):
                rows[r].append(c)
                hh = SparseBinaryMatrix.from_entries(b, b, rows)
            extra += 1
        if rank_gf2(hh) == b:
            return hh
    raise RuntimeError

HC = peg_construct(ConstructionConfig.from_json(packaged_config("codeC.json")))
plan = plan_levels(1000, 500, ["5/12", "5/13", "5/14"])
spec = packaged_config("ext_candidates_b100.json")
dists = [DegreeDistribution.from_pairs(d["mu"], d["nu"]) for d in spec["distributions"]]
cands = build_candidates(plan, 7, 30, dists, seed=5, invertible_only=True)
for c in cands:
    print(f"cand{c.dist_index}: girth={c.girth} Ng={c.n_girth_cycles} ace={c.avg_ace:.2f}", flush=True)
hcc, hace = select_cc(cands), select_ace(cands)
print(f"cc pick: cand{hcc.dist_index}  ace pick: cand{hace.dist_index}", flush=True)
lads = {"cc": extend(HC, hcc.h, plan), "ace": extend(HC, hace.h, plan),
        "rnd": extend(HC, random_hext(100, 99), plan)}
lvl = 3
cfg = SweepConfig(snr_grid_db=(1.6,), max_iters=100, min_frame_errors=200, max_frames=120000, seed=17)
recs = {}
for name, lad in lads.items():
    t0 = time.time()
    rep = run_sweep(lad.matrix_at(lvl), lad.generator_at(lvl), cfg)
    recs[name] = rep.records[0]
    r = rep.records[0]
    print(f"{name}: ber={r.ber(500):.3e} ({r.frame_errors}fe/{r.frames}) [{time.time()-t0:.0f}s]", flush=True)
z_cc = cluster_z_ber(recs["ace"], recs["cc"], 500)
z_ra = cluster_z_ber(recs["ace"], recs["rnd"], 500)
z_rc = cluster_z_ber(recs["cc"], recs["rnd"], 500)
print(f"z(ace<cc)={z_cc:.2f} z(ace<rnd)={z_ra:.2f} z(cc<rnd)={z_rc:.2f}", flush=True)
