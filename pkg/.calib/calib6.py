import numpy as np, time
from rcldpc.construction import ConstructionConfig, DegreeDistribution, peg_construct, packaged_config, graph_girth
from rcldpc.gf2 import SparseBinaryMatrix
from rcldpc.extension import plan_levels, build_candidates, select_ace, extend
from rcldpc.harness import SweepConfig, run_sweep

def sweep(H, G, grid, fe=60, cap=40000, iters=100, seed=5, label=""):
    cfg = SweepConfig(snr_grid_db=grid, max_iters=iters, min_frame_errors=fe, max_frames=cap, seed=seed)
    t0 = time.time()
    rep = run_sweep(H, G, cfg)
    line = " ".join(f"{r.snr_db}:{r.ber(rep.k):.2e}({r.frame_errors}fe/{r.frames})" for r in rep.records)
    print(f"{label:16s} {line} [{time.time()-t0:.0f}s]", flush=True)

HC = peg_construct(ConstructionConfig.from_json(packaged_config("codeC.json")))
plan = plan_levels(1000, 500, ["5/12", "5/13", "5/14"])
grid = (1.6, 1.8, 2.0)
lvl = 3

fams = {
 "dense_3456": ([[0.2,2],[0.3,3],[0.3,4],[0.2,5]], "same"),
 "dense_456":  ([[0.3,3],[0.4,4],[0.3,5]], "same"),
 "dense_67":   ([[0.5,5],[0.5,6]], "same"),
}
for name, (mu, _) in fams.items():
    d = DegreeDistribution.from_pairs(mu, mu)
    try:
        cands = build_candidates(plan, 7, 30, [d]*4, seed=5, invertible_only=True)
    except ValueError as e:
        print(name, "infeasible:", e, flush=True)
        continue
    c = cands[0]
    lad = extend(HC, c.h, plan)
    print(f"{name}: girth={c.girth} Ng={c.n_girth_cycles} ace={c.avg_ace:.1f} "
          f"ladder girths={[graph_girth(lad.matrix_at(i)) for i in range(5)]}", flush=True)
    sweep(lad.matrix_at(lvl), lad.generator_at(lvl), grid, label=f"{name} 5/13")
