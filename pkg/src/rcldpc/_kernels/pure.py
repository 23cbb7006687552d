"""Pure NumPy/SciPy implementations of the hot kernels.

These are the reference semantics for the compiled extension in
``rcldpc._kernels._core``; the two backends must agree bit-for-bit on all
integer outputs (graph searches, walk counts) and to floating-point noise on
BP messages. Selected automatically when the extension is missing, or forced
with ``RCLDPC_KERNELS=pure``.

All kernels operate on flat CSR-style arrays so the same call signatures work
for both backends:

* bipartite adjacency: ``var_ptr/var_adj`` (variable -> check ids) and
  ``chk_ptr/chk_adj`` (check -> variable ids),
* the non-backtracking walk census uses a directed-edge successor CSR,
* BP uses check-major edge arrays plus a variable-major gather index.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

BACKEND_NAME = "pure"

_ATANH_GUARD = 1.0 - 1e-15


# ---------------------------------------------------------------------------
# girth


def girth(nv, var_ptr, var_adj, chk_ptr, chk_adj):
    """Length of the shortest cycle in the bipartite graph, 0 if acyclic.

    BFS from every variable node (every cycle touches one), keeping the best
    candidate ``dist[u] + dist[w] + 1`` over non-tree edges; expansion is
    pruned once a layer cannot improve on the current best.
    """
    nc = len(chk_ptr) - 1
    best = 0  # 0 means "none found yet"
    dist_v = np.empty(nv, dtype=np.int32)
    dist_c = np.empty(nc, dtype=np.int32)
    for root in range(nv):
        if var_ptr[root + 1] - var_ptr[root] < 2:
            # a cycle through root needs two distinct root edges
            continue
        dist_v.fill(-1)
        dist_c.fill(-1)
        dist_v[root] = 0
        frontier = [root]
        depth = 0
        var_layer = True
        while frontier:
            if best and depth >= (best // 2):
                break
            nxt = []
            if var_layer:
                for u in frontier:
                    for e in range(var_ptr[u], var_ptr[u + 1]):
                        c = var_adj[e]
                        if dist_c[c] < 0:
                            dist_c[c] = depth + 1
                            nxt.append(c)
                        elif dist_c[c] >= depth:
                            cand = depth + dist_c[c] + 1
                            if best == 0 or cand < best:
                                best = cand
            else:
                for c in frontier:
                    for e in range(chk_ptr[c], chk_ptr[c + 1]):
                        u = chk_adj[e]
                        if dist_v[u] < 0:
                            dist_v[u] = depth + 1
                            nxt.append(u)
                        elif dist_v[u] >= depth:
                            cand = depth + dist_v[u] + 1
                            if best == 0 or cand < best:
                                best = cand
            frontier = nxt
            var_layer = not var_layer
            depth += 1
    return int(best)


# ---------------------------------------------------------------------------
# non-backtracking walk census


def nb_walk_diag(n_dir, succ_ptr, succ_idx, wt_target, sources, ks, block=256):
    """Diagonal entries of powers of the non-backtracking edge matrix.

    For each directed source edge ``e`` in ``sources`` and each step count
    ``k`` in ``ks`` this returns the number of non-backtracking closed edge
    sequences ``e -> ... -> e`` of length ``k`` (tailless closed walks based
    at the source edge's origin) together with the walk-weight accumulator
    ``sum over walks of sum over arrivals of wt_target`` used for ACE sums.

    Returns ``(counts, aces)`` with shape ``(len(sources), len(ks))``, int64.
    """
    ks = list(ks)
    kmax = max(ks) if ks else 0
    nsrc = len(sources)
    counts = np.zeros((nsrc, len(ks)), dtype=np.int64)
    aces = np.zeros((nsrc, len(ks)), dtype=np.int64)
    if kmax == 0 or nsrc == 0:
        return counts, aces
    data = np.ones(len(succ_idx), dtype=np.int64)
    # B[e, f] = 1 iff f may follow e; propagate row vectors x_{t+1} = x_t @ B
    B = sp.csr_matrix((data, succ_idx, succ_ptr), shape=(n_dir, n_dir))
    wt = wt_target.astype(np.int64)
    kset = {k: i for i, k in enumerate(ks)}
    for lo in range(0, nsrc, block):
        src = sources[lo : lo + block]
        nb = len(src)
        x = np.zeros((nb, n_dir), dtype=np.int64)
        a = np.zeros((nb, n_dir), dtype=np.int64)
        x[np.arange(nb), src] = 1
        a[np.arange(nb), src] = wt[src]
        for step in range(1, kmax + 1):
            x2 = x @ B
            a2 = (a @ B) + x2 * wt[None, :]
            x, a = x2, a2
            if step in kset:
                col = kset[step]
                counts[lo : lo + nb, col] = x[np.arange(nb), src]
                aces[lo : lo + nb, col] = a[np.arange(nb), src]
    return counts, aces


# ---------------------------------------------------------------------------
# BP decoding


def bp_decode(llr, chk_ptr, edge_var, var_gather, max_iters, clamp):
    """Flooding log-domain sum-product decode.

    ``chk_ptr``/``edge_var`` give the check-major edge list; ``var_gather``
    maps each check-major edge id to its variable-major slot so that check
    messages can be summed per variable with ``np.add.at``-free reductions.

    Convergence requires a zero syndrome AND no exactly-zero posterior, so a
    decision assembled from undetermined (all-zero message) positions is
    never claimed as a success.

    Returns ``(hard_bits uint8[N], iters, converged)``.
    """
    llr = np.asarray(llr, dtype=np.float64)
    n = llr.shape[0]
    ne = len(edge_var)
    m = len(chk_ptr) - 1
    deg = np.diff(chk_ptr)

    totals = llr.copy()
    bits = (totals < 0.0).astype(np.uint8)
    if _syndrome_ok(bits, chk_ptr, edge_var) and not np.any(totals == 0.0):
        return bits, 0, True
    if ne == 0 or max_iters == 0:
        return bits, 0, False

    order = np.argsort(var_gather, kind="stable")  # check-major ids in var-major order
    evar_sorted = edge_var[order]
    vstarts = np.searchsorted(evar_sorted, np.arange(n + 1))

    v2c = np.clip(llr[edge_var], -clamp, clamp)
    c2v = np.zeros(ne, dtype=np.float64)
    seg = np.repeat(np.arange(m), deg)

    for it in range(1, max_iters + 1):
        # check pass: per-edge product of the other tanh values, done with
        # prefix/suffix products so exact zeros (punctured bits) need no
        # special casing
        t = np.tanh(0.5 * v2c)
        pre = np.empty(ne, dtype=np.float64)
        suf = np.empty(ne, dtype=np.float64)
        _segment_prefix_products(t, chk_ptr, pre, suf)
        raw = np.clip(pre * suf, -_ATANH_GUARD, _ATANH_GUARD)
        c2v = np.clip(2.0 * np.arctanh(raw), -clamp, clamp)

        # variable pass
        sums = np.add.reduceat(
            np.concatenate((c2v[order], [0.0])), vstarts[:-1]
        ) * (np.diff(vstarts) > 0)
        totals = llr + sums
        v2c = np.clip(totals[edge_var] - c2v, -clamp, clamp)

        bits = (totals < 0.0).astype(np.uint8)
        if _syndrome_ok(bits, chk_ptr, edge_var) and not np.any(totals == 0.0):
            return bits, it, True
    return bits, max_iters, False


def _segment_prefix_products(t, ptr, pre, suf):
    m = len(ptr) - 1
    for c in range(m):
        lo, hi = ptr[c], ptr[c + 1]
        p = 1.0
        for e in range(lo, hi):
            pre[e] = p
            p *= t[e]
        s = 1.0
        for e in range(hi - 1, lo - 1, -1):
            suf[e] = s
            s *= t[e]


def _syndrome_ok(bits, chk_ptr, edge_var):
    if len(edge_var) == 0:
        return True
    x = bits[edge_var].astype(np.int64)
    acc = np.add.reduceat(np.concatenate((x, [0])), chk_ptr[:-1])
    acc = acc * (np.diff(chk_ptr) > 0)
    return not np.any(acc & 1)


# ---------------------------------------------------------------------------
# PEG neighbourhood expansion


def peg_bfs(root, var_deg, var_ptr, var_adj, chk_deg, chk_ptr, chk_adj, wt,
            dist_chk, ace_chk):
    """Expand the Tanner-graph neighbourhood tree of variable ``root``.

    Fills ``dist_chk`` with the (odd) BFS distance to every reachable check
    node, -1 for unreached, and ``ace_chk`` with the minimum accumulated
    ACE weight (sum of ``wt`` over the variable nodes on a shortest path,
    root included) over the shortest paths to that check. Adjacency arrays
    hold the partially built graph: only the first ``var_deg[v]`` /
    ``chk_deg[c]`` slots per node are valid.
    """
    nv = len(var_deg)
    nc = len(chk_deg)
    dist_chk.fill(-1)
    ace_chk.fill(0)
    dist_var = np.full(nv, -1, dtype=np.int32)
    ace_var = np.zeros(nv, dtype=np.int64)
    dist_var[root] = 0
    ace_var[root] = wt[root]
    var_layer = [root]
    depth = 0
    while var_layer:
        chk_layer = []
        for u in var_layer:
            au = ace_var[u]
            for e in range(var_ptr[u], var_ptr[u] + var_deg[u]):
                c = var_adj[e]
                if dist_chk[c] < 0:
                    dist_chk[c] = depth + 1
                    ace_chk[c] = au
                    chk_layer.append(c)
                elif dist_chk[c] == depth + 1 and au < ace_chk[c]:
                    ace_chk[c] = au
        if not chk_layer:
            break
        var_layer = []
        for c in chk_layer:
            ac = ace_chk[c]
            for e in range(chk_ptr[c], chk_ptr[c] + chk_deg[c]):
                u = chk_adj[e]
                cand = ac + wt[u]
                if dist_var[u] < 0:
                    dist_var[u] = depth + 2
                    ace_var[u] = cand
                    var_layer.append(u)
                elif dist_var[u] == depth + 2 and cand < ace_var[u]:
                    ace_var[u] = cand
        depth += 2
