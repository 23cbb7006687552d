import numpy as np, time
from rcldpc._kernels import get_backend
from rcldpc.construction import quantize_degrees, DegreeDistribution, _swap_repair
from rcldpc.gf2 import SparseBinaryMatrix
from rcldpc.cycles import count_cycles, ace_profile

def peg_variant(var_deg_target, chk_deg_target, seed, ace_depth=9, ace_threshold=4, variant="cap"):
    kern = get_backend()
    var_deg_target = np.asarray(var_deg_target, dtype=np.int32)
    chk_deg_target = np.asarray(chk_deg_target, dtype=np.int32)
    nv, nc = len(var_deg_target), len(chk_deg_target)
    rng = np.random.Generator(np.random.PCG64(seed))
    var_ptr = np.zeros(nv + 1, dtype=np.int32); np.cumsum(var_deg_target, out=var_ptr[1:])
    chk_ptr = np.zeros(nc + 1, dtype=np.int32); np.cumsum(chk_deg_target, out=chk_ptr[1:])
    var_adj = np.zeros(var_ptr[-1], dtype=np.int32)
    chk_adj = np.zeros(chk_ptr[-1], dtype=np.int32)
    var_deg = np.zeros(nv, dtype=np.int32)
    chk_deg = np.zeros(nc, dtype=np.int32)
    wt = var_deg_target.astype(np.int64) - 2
    dist_chk = np.empty(nc, dtype=np.int32)
    ace_chk = np.empty(nc, dtype=np.int64)
    cap = chk_deg_target
    max_cycle = 2 * ace_depth
    for v in range(nv):
        for k in range(var_deg_target[v]):
            open_mask = chk_deg < cap
            if k == 0:
                cand = np.flatnonzero(open_mask)
                cand = cand[chk_deg[cand] == chk_deg[cand].min()]
            else:
                kern.peg_bfs(v, var_deg, var_ptr, var_adj, chk_deg, chk_ptr, chk_adj, wt, dist_chk, ace_chk)
                usable = open_mask & (dist_chk != 1)
                unreached = usable & (dist_chk < 0)
                if unreached.any():
                    cand = np.flatnonzero(unreached)
                    cand = cand[chk_deg[cand] == chk_deg[cand].min()]
                else:
                    cand = np.flatnonzero(usable)
                    far = dist_chk[cand].max()
                    if far == 3:
                        sw = _swap_repair(v, int(cand[dist_chk[cand]==3][0]), dist_chk,
                                          var_deg, var_ptr, var_adj, chk_deg, chk_ptr, chk_adj)
                        if sw >= 0:
                            var_adj[var_ptr[v] + var_deg[v]] = sw
                            var_deg[v] += 1
                            continue
                    cand = cand[dist_chk[cand] == far]
                    inrange = far + 1 <= max_cycle
                    if variant == "ace_first" and inrange and cand.size > 1:
                        ace = ace_chk[cand]
                        cand = cand[ace == ace.max()]
                        cand = cand[chk_deg[cand] == chk_deg[cand].min()]
                    else:
                        cand = cand[chk_deg[cand] == chk_deg[cand].min()]
                        if cand.size > 1 and inrange:
                            ace = ace_chk[cand] if variant == "uncap" else np.minimum(ace_chk[cand], ace_threshold)
                            cand = cand[ace == ace.max()]
            c = int(cand[rng.integers(cand.size)]) if cand.size > 1 else int(cand[0])
            var_adj[var_ptr[v] + var_deg[v]] = c
            chk_adj[chk_ptr[c] + chk_deg[c]] = v
            var_deg[v] += 1
            chk_deg[c] += 1
    rows = [np.sort(chk_adj[chk_ptr[c]: chk_ptr[c] + chk_deg[c]]) for c in range(nc)]
    return SparseBinaryMatrix.from_entries(nc, nv, rows)

muA = [[0.21,5],[0.25,3],[0.25,2],[0.29,1]]
distA = DegreeDistribution.from_pairs(muA, [[1.0,5]])
vd, cd = quantize_degrees(distA, 1000, 500)
for variant in ("cap", "uncap", "ace_first"):
    H = peg_variant(vd, cd, seed=7, variant=variant)
    cen = count_cycles(H)
    prof = ace_profile(H, cen)
    par = np.arange(500, 1000)
    am = prof.alpha_min[par]
    q = np.nanpercentile(am, [0, 25, 50, 75, 100]).round(1)
    print(f"{variant:10s}: girth={cen.girth} totals={cen.totals} alpha quartiles={q}", flush=True)
