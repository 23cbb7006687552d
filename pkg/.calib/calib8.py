import numpy as np, time
from rcldpc.construction import ConstructionConfig, peg_construct, packaged_config
from rcldpc.gf2 import systematize
from rcldpc.cycles import count_cycles
from rcldpc.puncture import cc_puncture, ace_puncture, SimPuncturingConfig, sim_puncture
from rcldpc.harness import SweepConfig, run_sweep, cluster_z_ber

H = peg_construct(ConstructionConfig.from_json(packaged_config("codeA.json")))
G, _ = systematize(H)
cen = count_cycles(H)
print("mother totals:", cen.totals, flush=True)
cc = cc_puncture(H, G.k, 200, census=cen)
ace = ace_puncture(H, G.k, 200, census=cen)
sim_cfg = SimPuncturingConfig(q=50, snr_grid_db=(2.0, 2.5, 3.0), repetitions=4,
                              training_bits=1000, seed=1, max_iters=60)
t0 = time.time()
sim, _ = sim_puncture(H, G, G.k, 200, sim_cfg)
print(f"sim search [{time.time()-t0:.0f}s]", flush=True)
cfg = SweepConfig(snr_grid_db=(3.1, 3.3, 3.5), max_iters=60, min_frame_errors=80, max_frames=120000, seed=4)
recs = {}
for name, pat in (("cc", cc), ("ace", ace), ("sim", sim)):
    t0 = time.time()
    rep = run_sweep(H, G, cfg, pattern=pat)
    recs[name] = rep.records
    line = " ".join(f"{r.snr_db}:{r.ber(500):.2e}({r.frame_errors}fe/{r.frames})" for r in rep.records)
    print(f"{name:4s} {line} [{time.time()-t0:.0f}s]", flush=True)
for i, snr in enumerate((3.1, 3.3, 3.5)):
    z_cc = cluster_z_ber(recs["ace"][i], recs["cc"][i], 500)
    z_sim = cluster_z_ber(recs["ace"][i], recs["sim"][i], 500)
    print(f"{snr}: z(ace<cc)={z_cc:.2f} z(ace<sim)={z_sim:.2f}", flush=True)
