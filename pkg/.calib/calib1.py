import numpy as np, time, json
from rcldpc.construction import ConstructionConfig, DegreeDistribution, peg_construct, packaged_config
from rcldpc.gf2 import systematize
from rcldpc.cycles import count_cycles, cycle_stats
from rcldpc.puncture import cc_puncture, ace_puncture, SimPuncturingConfig, sim_puncture
from rcldpc.harness import SweepConfig, run_sweep

# --- criteria 4/5: residual trends across seeds with descending ACE
print("== criteria 4/5 ==", flush=True)
base = packaged_config("codeA.json")
for seed in (7, 11, 13):
    cfgj = dict(base); cfgj["seed"] = seed
    H = peg_construct(ConstructionConfig.from_json(cfgj))
    cen = count_cycles(H)
    g = cen.girth
    cc = cc_puncture(H, 500, 200, census=cen)
    ace = ace_puncture(H, 500, 200, census=cen)
    def resid(pat):
        keep = sorted(set(range(H.cols)) - set(pat.indices))
        return count_cycles(H.submatrix_cols(keep), lengths=(g,))
    rc, ra = resid(cc), resid(ace)
    mu_cc_on = cycle_stats(rc, 800, g, "on_cycle").mean
    mu_ace_on = cycle_stats(ra, 800, g, "on_cycle").mean
    mu_cc_all = cycle_stats(rc, 800, g, "all").mean
    mu_ace_all = cycle_stats(ra, 800, g, "all").mean
    print(f"seed {seed}: g={g} N_g mother={cen.total(g)} cc={rc.total(g)} ace={ra.total(g)} "
          f"red={1-rc.total(g)/max(cen.total(g),1):.0%} | mu_on cc={mu_cc_on:.2f} ace={mu_ace_on:.2f} "
          f"| mu_all cc={mu_cc_all:.2f} ace={mu_ace_all:.2f}", flush=True)

# --- criterion 6 probe: cc vs ace vs sim at candidate SNRs
print("== criterion 6 probe ==", flush=True)
H = peg_construct(ConstructionConfig.from_json(base))
G, _ = systematize(H)
cen = count_cycles(H)
cc = cc_puncture(H, G.k, 200, census=cen)
ace = ace_puncture(H, G.k, 200, census=cen)
t0 = time.time()
simcfg = SimPuncturingConfig(q=50, snr_grid_db=(2.0, 2.5, 3.0), repetitions=2,
                             training_bits=1000, seed=1, max_iters=60)
simpat, table = sim_puncture(H, G, G.k, 200, simcfg)
print(f"sim search ({time.time()-t0:.0f}s) winner q={simpat.params['q']} "
      f"avg_ber={min(r['avg_ber'] for r in table):.2e}", flush=True)
grid = (3.1, 3.3, 3.5)
for name, pat in (("cc", cc), ("ace", ace), ("sim", simpat)):
    cfg = SweepConfig(snr_grid_db=grid, max_iters=60, min_frame_errors=60, max_frames=60000, seed=5)
    t0 = time.time()
    rep = run_sweep(H, G, cfg, pattern=pat)
    line = " ".join(f"{r.snr_db}:{r.ber(500):.2e}({r.frame_errors}fe/{r.frames})" for r in rep.records)
    print(f"{name:4s} {line} [{time.time()-t0:.0f}s]", flush=True)
