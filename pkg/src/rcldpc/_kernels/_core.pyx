# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: girth search, non-backtracking walk census, BP decode,
PEG neighbourhood expansion. Semantics match rcldpc._kernels.pure."""

from libc.math cimport tanh, atanh
from libc.stdint cimport int64_t
from libc.string cimport memset

import numpy as np

BACKEND_NAME = "compiled"

cdef double ATANH_GUARD = 1.0 - 1e-15


def girth(int nv, int[::1] var_ptr, int[::1] var_adj,
          int[::1] chk_ptr, int[::1] chk_adj):
    cdef int nc = chk_ptr.shape[0] - 1
    cdef int best = 0
    cdef int root, depth, u, c, e, cand, i, nfro, nnxt
    cdef int[::1] dist_v = np.empty(nv, dtype=np.int32)
    cdef int[::1] dist_c = np.empty(nc, dtype=np.int32)
    cdef int[::1] fro = np.empty(nv + nc, dtype=np.int32)
    cdef int[::1] nxt = np.empty(nv + nc, dtype=np.int32)
    cdef bint var_layer

    for root in range(nv):
        if var_ptr[root + 1] - var_ptr[root] < 2:
            continue
        for i in range(nv):
            dist_v[i] = -1
        for i in range(nc):
            dist_c[i] = -1
        dist_v[root] = 0
        fro[0] = root
        nfro = 1
        depth = 0
        var_layer = True
        while nfro > 0:
            if best != 0 and depth >= best // 2:
                break
            nnxt = 0
            if var_layer:
                for i in range(nfro):
                    u = fro[i]
                    for e in range(var_ptr[u], var_ptr[u + 1]):
                        c = var_adj[e]
                        if dist_c[c] < 0:
                            dist_c[c] = depth + 1
                            nxt[nnxt] = c
                            nnxt += 1
                        elif dist_c[c] >= depth:
                            cand = depth + dist_c[c] + 1
                            if best == 0 or cand < best:
                                best = cand
            else:
                for i in range(nfro):
                    c = fro[i]
                    for e in range(chk_ptr[c], chk_ptr[c + 1]):
                        u = chk_adj[e]
                        if dist_v[u] < 0:
                            dist_v[u] = depth + 1
                            nxt[nnxt] = u
                            nnxt += 1
                        elif dist_v[u] >= depth:
                            cand = depth + dist_v[u] + 1
                            if best == 0 or cand < best:
                                best = cand
            fro, nxt = nxt, fro
            nfro = nnxt
            var_layer = not var_layer
            depth += 1
    return best


def nb_walk_diag(int n_dir, int64_t[::1] succ_ptr, int[::1] succ_idx,
                 int64_t[::1] wt_target, int[::1] sources, ks):
    """Per-source diagonal reads of non-backtracking walk counts/ACE sums."""
    cdef list ks_list = sorted(ks)
    cdef int nk = len(ks_list)
    cdef int nsrc = sources.shape[0]
    counts_np = np.zeros((nsrc, nk), dtype=np.int64)
    aces_np = np.zeros((nsrc, nk), dtype=np.int64)
    cdef int64_t[:, ::1] counts = counts_np
    cdef int64_t[:, ::1] aces = aces_np
    if nk == 0 or nsrc == 0:
        return counts_np, aces_np
    cdef int kmax = ks_list[nk - 1]
    cdef int64_t[::1] kmark = np.full(kmax + 1, -1, dtype=np.int64)
    cdef int i
    for i in range(nk):
        kmark[ks_list[i]] = i

    cdef int64_t[::1] x = np.zeros(n_dir, dtype=np.int64)
    cdef int64_t[::1] x2 = np.zeros(n_dir, dtype=np.int64)
    cdef int64_t[::1] a = np.zeros(n_dir, dtype=np.int64)
    cdef int64_t[::1] a2 = np.zeros(n_dir, dtype=np.int64)
    cdef int s, e0, step, f, col
    cdef int64_t j, xv, av
    cdef int64_t[::1] tmp

    for s in range(nsrc):
        e0 = sources[s]
        memset(&x[0], 0, n_dir * sizeof(int64_t))
        memset(&a[0], 0, n_dir * sizeof(int64_t))
        x[e0] = 1
        a[e0] = wt_target[e0]
        for step in range(1, kmax + 1):
            memset(&x2[0], 0, n_dir * sizeof(int64_t))
            memset(&a2[0], 0, n_dir * sizeof(int64_t))
            for f in range(n_dir):
                xv = x[f]
                if xv == 0:
                    continue
                av = a[f]
                for j in range(succ_ptr[f], succ_ptr[f + 1]):
                    x2[succ_idx[j]] += xv
                    a2[succ_idx[j]] += av + xv * wt_target[succ_idx[j]]
            tmp = x; x = x2; x2 = tmp
            tmp = a; a = a2; a2 = tmp
            col = kmark[step]
            if col >= 0:
                counts[s, col] = x[e0]
                aces[s, col] = a[e0]
    return counts_np, aces_np


def bp_decode(double[::1] llr, int[::1] chk_ptr, int[::1] edge_var,
              int[::1] var_gather, int max_iters, double clamp):
    cdef int n = llr.shape[0]
    cdef int m = chk_ptr.shape[0] - 1
    cdef int ne = edge_var.shape[0]
    cdef int it, c, e, v, lo, hi
    cdef double p, s, raw, tot
    cdef bint ok, any_zero

    bits_np = np.empty(n, dtype=np.uint8)
    cdef unsigned char[::1] bits = bits_np
    cdef double[::1] totals = np.empty(n, dtype=np.float64)
    cdef double[::1] v2c = np.empty(ne, dtype=np.float64)
    cdef double[::1] c2v = np.zeros(ne, dtype=np.float64)
    cdef double[::1] t = np.empty(ne, dtype=np.float64)
    cdef double[::1] pre = np.empty(ne, dtype=np.float64)
    cdef double[::1] suf = np.empty(ne, dtype=np.float64)

    any_zero = False
    for v in range(n):
        tot = llr[v]
        totals[v] = tot
        bits[v] = 1 if tot < 0.0 else 0
        if tot == 0.0:
            any_zero = True
    if _syndrome_ok(bits, chk_ptr, edge_var) and not any_zero:
        return bits_np, 0, True
    if ne == 0 or max_iters == 0:
        return bits_np, 0, False

    for e in range(ne):
        raw = llr[edge_var[e]]
        if raw > clamp:
            raw = clamp
        elif raw < -clamp:
            raw = -clamp
        v2c[e] = raw

    for it in range(1, max_iters + 1):
        for e in range(ne):
            t[e] = tanh(0.5 * v2c[e])
        for c in range(m):
            lo = chk_ptr[c]; hi = chk_ptr[c + 1]
            p = 1.0
            for e in range(lo, hi):
                pre[e] = p
                p *= t[e]
            s = 1.0
            for e in range(hi - 1, lo - 1, -1):
                suf[e] = s
                s *= t[e]
        for e in range(ne):
            raw = pre[e] * suf[e]
            if raw > ATANH_GUARD:
                raw = ATANH_GUARD
            elif raw < -ATANH_GUARD:
                raw = -ATANH_GUARD
            raw = 2.0 * atanh(raw)
            if raw > clamp:
                raw = clamp
            elif raw < -clamp:
                raw = -clamp
            c2v[e] = raw

        for v in range(n):
            totals[v] = llr[v]
        for e in range(ne):
            totals[edge_var[e]] += c2v[e]
        any_zero = False
        for v in range(n):
            tot = totals[v]
            bits[v] = 1 if tot < 0.0 else 0
            if tot == 0.0:
                any_zero = True
        for e in range(ne):
            raw = totals[edge_var[e]] - c2v[e]
            if raw > clamp:
                raw = clamp
            elif raw < -clamp:
                raw = -clamp
            v2c[e] = raw
        if not any_zero and _syndrome_ok(bits, chk_ptr, edge_var):
            return bits_np, it, True
    return bits_np, max_iters, False


cdef bint _syndrome_ok(unsigned char[::1] bits, int[::1] chk_ptr,
                       int[::1] edge_var):
    cdef int m = chk_ptr.shape[0] - 1
    cdef int c, e, acc
    for c in range(m):
        acc = 0
        for e in range(chk_ptr[c], chk_ptr[c + 1]):
            acc ^= bits[edge_var[e]]
        if acc:
            return False
    return True


def peg_bfs(int root, int[::1] var_deg, int[::1] var_ptr, int[::1] var_adj,
            int[::1] chk_deg, int[::1] chk_ptr, int[::1] chk_adj,
            int64_t[::1] wt, int[::1] dist_chk, int64_t[::1] ace_chk):
    cdef int nv = var_deg.shape[0]
    cdef int nc = chk_deg.shape[0]
    cdef int depth, u, c, e, i, nvl, ncl
    cdef int64_t au, ac, cand
    cdef int[::1] dist_var = np.full(nv, -1, dtype=np.int32)
    cdef int64_t[::1] ace_var = np.zeros(nv, dtype=np.int64)
    cdef int[::1] vlayer = np.empty(nv, dtype=np.int32)
    cdef int[::1] clayer = np.empty(nc, dtype=np.int32)

    for i in range(nc):
        dist_chk[i] = -1
        ace_chk[i] = 0
    dist_var[root] = 0
    ace_var[root] = wt[root]
    vlayer[0] = root
    nvl = 1
    depth = 0
    while nvl > 0:
        ncl = 0
        for i in range(nvl):
            u = vlayer[i]
            au = ace_var[u]
            for e in range(var_ptr[u], var_ptr[u] + var_deg[u]):
                c = var_adj[e]
                if dist_chk[c] < 0:
                    dist_chk[c] = depth + 1
                    ace_chk[c] = au
                    clayer[ncl] = c
                    ncl += 1
                elif dist_chk[c] == depth + 1 and au < ace_chk[c]:
                    ace_chk[c] = au
        if ncl == 0:
            break
        nvl = 0
        for i in range(ncl):
            c = clayer[i]
            ac = ace_chk[c]
            for e in range(chk_ptr[c], chk_ptr[c] + chk_deg[c]):
                u = chk_adj[e]
                cand = ac + wt[u]
                if dist_var[u] < 0:
                    dist_var[u] = depth + 2
                    ace_var[u] = cand
                    vlayer[nvl] = u
                    nvl += 1
                elif dist_var[u] == depth + 2 and cand < ace_var[u]:
                    ace_var[u] = cand
        depth += 2
