import numpy as np, time
from fractions import Fraction
from rcldpc.construction import ConstructionConfig, DegreeDistribution, peg_construct, packaged_config, graph_girth
from rcldpc.gf2 import systematize, rank_gf2, SparseBinaryMatrix
from rcldpc.cycles import count_cycles
from rcldpc.puncture import ace_puncture, cc_puncture
from rcldpc.extension import plan_levels, build_candidates, select_cc, select_ace, extend
from rcldpc.harness import SweepConfig, run_sweep
from rcldpc.channel import rng_stream

def sweep(H, G, grid, pat=None, ladder_lvl=None, fe=60, cap=40000, iters=60, seed=5, label=""):
    cfg = SweepConfig(snr_grid_db=grid, max_iters=iters, min_frame_errors=fe, max_frames=cap, seed=seed)
    t0 = time.time()
    rep = run_sweep(H, G, cfg, pattern=pat)
    line = " ".join(f"{r.snr_db}:{r.ber(rep.k):.2e}({r.frame_errors}fe/{r.frames})" for r in rep.records)
    print(f"{label:16s} {line} [{time.time()-t0:.0f}s]", flush=True)
    return rep

# --- criterion 7: ACE-punctured 5/8 vs fresh N=800 R=0.625
print("== criterion 7 ==", flush=True)
HA = peg_construct(ConstructionConfig.from_json(packaged_config("codeA.json")))
GA, _ = systematize(HA)
cenA = count_cycles(HA)
ace = ace_puncture(HA, GA.k, 200, census=cenA)
H8 = peg_construct(ConstructionConfig.from_json(packaged_config("ref_n800_r0625.json")))
G8, _ = systematize(H8)
print(f"ref code: N={H8.cols} girth={graph_girth(H8)} K={G8.k}", flush=True)
grid7 = (2.4, 2.7, 3.0, 3.3)
sweep(HA, GA, grid7, pat=ace, fe=80, cap=60000, label="aceP 5/8")
sweep(H8, G8, grid7, fe=80, cap=60000, label="fresh 0.625")

# --- criterion 9/10 codes
print("== ladders ==", flush=True)
HC = peg_construct(ConstructionConfig.from_json(packaged_config("codeC.json")))
GC, _ = systematize(HC)
plan = plan_levels(1000, 500, ["5/12", "5/13", "5/14"])
spec = packaged_config("ext_candidates_b100.json")
dists = [DegreeDistribution.from_pairs(d["mu"], d["nu"]) for d in spec["distributions"]]
t0 = time.time()
cands = build_candidates(plan, 7, 30, dists, seed=5, invertible_only=True)
for c in cands:
    print(f"  cand{c.dist_index}: girth={c.girth} Ng={c.n_girth_cycles} ace={c.avg_ace:.2f}", flush=True)
hcc, hace = select_cc(cands), select_ace(cands)
print(f"cc->cand{hcc.dist_index} ace->cand{hace.dist_index} [{time.time()-t0:.0f}s]", flush=True)

# random control h_ext: random column degrees 2/3, no conditioning, invertible
def random_hext(b, seed):
    for attempt in range(200):
        rng = rng_stream(seed, attempt)
        cols = [rng.choice(b, size=int(rng.integers(2, 4)), replace=False) for _ in range(b)]
        rows = [[] for _ in range(b)]
        for j, rs in enumerate(cols):
            for r in rs:
                rows[int(r)].append(j)
        hh = SparseBinaryMatrix.from_entries(b, b, rows)
        if rank_gf2(hh) == b:
            return hh, attempt
    raise RuntimeError("no invertible random control")
hrnd, att = random_hext(100, 99)
print(f"random control girth={graph_girth(hrnd)} (attempt {att})", flush=True)

lad_cc = extend(HC, hcc.h, plan)
lad_ace = extend(HC, hace.h, plan)
lad_rnd = extend(HC, hrnd, plan)
lvl = lad_cc.plan.levels[1]  # rate 5/13
grid9 = (1.2, 1.6, 2.0)
for name, lad in (("cc-ext", lad_cc), ("ace-ext", lad_ace), ("rnd-ext", lad_rnd)):
    sweep(lad.matrix_at(lvl), lad.generator_at(lvl), grid9, fe=60, cap=30000, iters=100, label=f"{name} 5/13")

# --- criterion 10: 5/8 and 5/13 crossover
print("== criterion 10 ==", flush=True)
cenC = count_cycles(HC)
aceC = ace_puncture(HC, GC.k, 200, census=cenC)  # 5/8 punctured from C
H7 = peg_construct(ConstructionConfig.from_json(packaged_config("mother_n700_r57.json")))
G7, _ = systematize(H7)
plan7 = plan_levels(700, 200, ["5/8"])
cands7 = build_candidates(plan7, 7, 30, dists[:2], seed=5, invertible_only=True)
lad7 = extend(H7, select_ace(cands7).h, plan7)
print(f"n700 girth={graph_girth(H7)} plan B={plan7.b}", flush=True)
grid10h = (2.6, 3.0, 3.4)
sweep(HC, GC, grid10h, pat=aceC, fe=60, cap=30000, iters=100, label="punct 5/8")
sweep(lad7.matrix_at(1), lad7.generator_at(1), grid10h, fe=60, cap=30000, iters=100, label="ext 5/8")

H14 = peg_construct(ConstructionConfig.from_json(packaged_config("mother_n1400_r514.json")))
G14, _ = systematize(H14)
cen14 = count_cycles(H14)
ace14 = ace_puncture(H14, G14.k, 100, census=cen14)
print(f"n1400 girth={graph_girth(H14)}", flush=True)
grid10l = (1.2, 1.6, 2.0)
sweep(H14, G14, grid10l, pat=ace14, fe=60, cap=30000, iters=100, label="punct 5/13")
sweep(lad_ace.matrix_at(lvl), lad_ace.generator_at(lvl), grid10l, fe=60, cap=30000, iters=100, label="ext 5/13(dup)")
