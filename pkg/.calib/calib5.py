import numpy as np, time
from rcldpc.construction import ConstructionConfig, DegreeDistribution, peg_construct, packaged_config, graph_girth
from rcldpc.gf2 import systematize, rank_gf2, SparseBinaryMatrix
from rcldpc.cycles import count_cycles
from rcldpc.puncture import ace_puncture
from rcldpc.extension import plan_levels, build_candidates, select_ace, ExtensionLadder, ExtensionRankError, _collision_free_shift
from rcldpc.gf2 import systematize as syst
from rcldpc.harness import SweepConfig, run_sweep

def extend_variant(h, h_ext, plan, window_blocks):
    """window_blocks: function lvl -> base column of the second identity."""
    b = plan.b
    g0, _ = syst(h)
    mats, gens = [], []
    rows = [h.row(r).tolist() for r in range(h.rows)]
    n0 = h.cols
    col_rows = [set() for _ in range(n0 + plan.num_blocks * b)]
    for r, cols in enumerate(rows):
        for c in cols:
            col_rows[c].add(r)
    for lvl in range(1, plan.num_blocks + 1):
        prev = n0 + (lvl - 2) * b if lvl >= 2 else n0 - b
        newc = n0 + (lvl - 1) * b
        base = window_blocks(lvl)
        shift = _collision_free_shift(col_rows, base, prev, b)
        for i in range(b):
            row = [prev + i]
            if shift >= 0:
                row.append(base + ((i + shift) % b))
            row.extend(newc + int(c) for c in h_ext.row(i))
            row = sorted(row)
            for c in row:
                col_rows[c].add(len(rows))
            rows.append(row)
        hl = SparseBinaryMatrix.from_entries(h.rows + lvl * b, n0 + lvl * b, rows)
        gl, _ = syst(hl)
        mats.append(hl); gens.append(gl)
    return ExtensionLadder(mother=h, mother_gen=g0, h_ext=h_ext, plan=plan,
                           matrices=tuple(mats), generators=tuple(gens))

def sweep(H, G, grid, pat=None, fe=60, cap=40000, iters=100, seed=5, label=""):
    cfg = SweepConfig(snr_grid_db=grid, max_iters=iters, min_frame_errors=fe, max_frames=cap, seed=seed)
    t0 = time.time()
    rep = run_sweep(H, G, cfg, pattern=pat)
    line = " ".join(f"{r.snr_db}:{r.ber(rep.k):.2e}({r.frame_errors}fe/{r.frames})" for r in rep.records)
    print(f"{label:16s} {line} [{time.time()-t0:.0f}s]", flush=True)
    return rep

HC = peg_construct(ConstructionConfig.from_json(packaged_config("codeC.json")))
plan = plan_levels(1000, 500, ["5/12", "5/13", "5/14"])
spec = packaged_config("ext_candidates_b100.json")
dists = [DegreeDistribution.from_pairs(d["mu"], d["nu"]) for d in spec["distributions"]]
cands = build_candidates(plan, 7, 30, dists, seed=5, invertible_only=True)
hace = select_ace(cands)
grid = (1.6, 1.8, 2.0)

# variant A: current (info walk up from block 0)
ladA = extend_variant(HC, hace.h, plan, lambda l: ((l - 1) % 8) * 100)
# variant B: parity walk down from block 8 (weakest degree-2 columns)
ladB = extend_variant(HC, hace.h, plan, lambda l: (8 - (l - 1) % 4) * 100)
# variant C: mixed: parity block then info block alternating
ladC = extend_variant(HC, hace.h, plan, lambda l: [800, 300, 700, 400][(l - 1) % 4])
lvl = 3
for name, lad in (("A info-walk", ladA), ("B parity-desc", ladB), ("C mixed", ladC)):
    print(name, "girths:", [graph_girth(lad.matrix_at(i)) for i in range(5)], flush=True)
    sweep(lad.matrix_at(lvl), lad.generator_at(lvl), grid, label=f"{name} 5/13")
