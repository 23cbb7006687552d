import numpy as np, time
from rcldpc.construction import ConstructionConfig, DegreeDistribution, peg_construct, packaged_config, graph_girth
from rcldpc.gf2 import systematize, rank_gf2, SparseBinaryMatrix
from rcldpc.cycles import count_cycles
from rcldpc.puncture import ace_puncture
from rcldpc.extension import plan_levels, build_candidates, select_cc, select_ace, extend
from rcldpc.harness import SweepConfig, run_sweep, arq_policy_from_family, run_arq_throughput, awgn_capacity_bits
from rcldpc.channel import rng_stream

def sweep(H, G, grid, pat=None, fe=60, cap=30000, iters=100, seed=5, label=""):
    cfg = SweepConfig(snr_grid_db=grid, max_iters=iters, min_frame_errors=fe, max_frames=cap, seed=seed)
    t0 = time.time()
    rep = run_sweep(H, G, cfg, pattern=pat)
    line = " ".join(f"{r.snr_db}:{r.ber(rep.k):.2e}({r.frame_errors}fe/{r.frames})" for r in rep.records)
    print(f"{label:14s} {line} [{time.time()-t0:.0f}s]", flush=True)
    return rep

def random_hext(b, seed):
    for attempt in range(50):
        rng = rng_stream(seed, attempt)
        rows = [[] for _ in range(b)]
        for j in range(b):
            for r in rng.choice(b, size=3, replace=False):
                rows[int(r)].append(j)
        h = SparseBinaryMatrix.from_entries(b, b, rows)
        extra = 0
        while rank_gf2(h) < b and extra < 3 * b:
            r = int(rng.integers(b)); c = int(rng.integers(b))
            if c not in h.row(r):
                rows[r].append(c)
                h = SparseBinaryMatrix.from_entries(b, b, rows)
            extra += 1
        if rank_gf2(h) == b:
            return h
    raise RuntimeError("no invertible control")

HC = peg_construct(ConstructionConfig.from_json(packaged_config("codeC.json")))
GC, _ = systematize(HC)
plan = plan_levels(1000, 500, ["5/12", "5/13", "5/14"])
spec = packaged_config("ext_candidates_b100.json")
dists = [DegreeDistribution.from_pairs(d["mu"], d["nu"]) for d in spec["distributions"]]
cands = build_candidates(plan, 7, 30, dists, seed=5, invertible_only=True)
hcc, hace = select_cc(cands), select_ace(cands)
hrnd = random_hext(100, 99)
print(f"controls: cc=cand{hcc.dist_index} ace=cand{hace.dist_index} rnd girth={graph_girth(hrnd)}", flush=True)
lad_cc = extend(HC, hcc.h, plan)
lad_ace = extend(HC, hace.h, plan)
lad_rnd = extend(HC, hrnd, plan)
lvl13 = 3
print("== criterion 9: rate 5/13 ladders ==", flush=True)
grid9 = (1.4, 1.8, 2.2)
for name, lad in (("cc-ext", lad_cc), ("ace-ext", lad_ace), ("rnd-ext", lad_rnd)):
    sweep(lad.matrix_at(lvl13), lad.generator_at(lvl13), grid9, fe=60, cap=30000, label=f"{name} 5/13")

print("== criterion 10 ==", flush=True)
cenC = count_cycles(HC)
aceC = ace_puncture(HC, GC.k, 200, census=cenC)
H7 = peg_construct(ConstructionConfig.from_json(packaged_config("mother_n700_r57.json")))
plan7 = plan_levels(700, 200, ["5/8"])
cands7 = build_candidates(plan7, 7, 30, dists[:2], seed=5, invertible_only=True)
lad7 = extend(H7, select_ace(cands7).h, plan7)
print(f"n700 girth={graph_girth(H7)} B={plan7.b}", flush=True)
grid10h = (2.8, 3.2, 3.6)
sweep(HC, GC, grid10h, pat=aceC, fe=60, cap=40000, label="punct 5/8")
sweep(lad7.matrix_at(1), lad7.generator_at(1), grid10h, fe=60, cap=40000, label="ext 5/8")

H14 = peg_construct(ConstructionConfig.from_json(packaged_config("mother_n1400_r514.json")))
G14, _ = systematize(H14)
cen14 = count_cycles(H14)
ace14 = ace_puncture(H14, G14.k, 100, census=cen14)
print(f"n1400 girth={graph_girth(H14)}", flush=True)
grid10l = (1.4, 1.8, 2.2)
sweep(H14, G14, grid10l, pat=ace14, fe=60, cap=30000, label="punct 5/13")
sweep(lad_ace.matrix_at(lvl13), lad_ace.generator_at(lvl13), grid10l, fe=60, cap=30000, label="ext 5/13")

print("== criterion 11: ARQ ==", flush=True)
policy = arq_policy_from_family(HC, [aceC], ladder=lad_ace, max_transmissions=2)
print("stages:", [(s.label, round(s.rate, 3), int(s.reveal.size)) for s in policy.stages], flush=True)
cfg = SweepConfig(snr_grid_db=(-2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0), max_iters=60,
                  min_frame_errors=40, max_frames=1500, seed=8, snr_is_es=True)
t0 = time.time()
rep = run_arq_throughput(policy, cfg)
for r in rep.records:
    print(f"  {r.snr_db:5.1f} dB: tput={r.throughput:.4f} cap={awgn_capacity_bits(r.snr_db):.3f} "
          f"frames={r.frames} stages={r.stage_successes}", flush=True)
print(f"[{time.time()-t0:.0f}s]", flush=True)
