"""Tanner-graph cycle analysis: girth, per-node short-cycle census, ACE.

Counting works on the non-backtracking directed-edge graph: the number of
tailless backtrackless closed walks of length k based at a node equals twice
the number of k-cycles through it whenever k <= 2*girth - 2. That covers
lengths (g, g+2, g+4) except on girth-4 graphs at length 8 = 2g, where the
walk count also picks up compositions of two 4-cycles; those are removed
exactly by enumerating the 4-cycles and classifying how pairs of them can
share vertices (a vertex, an edge, a 2-path, or two same-side vertices).

Vertices are identified by unified ids: variables 0..N-1, checks N..N+M-1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from ._kernels import get_backend
from .construction import graph_girth
from .gf2 import SparseBinaryMatrix

BRUTE_FORCE_COL_BOUND = 40


class InvalidCycleError(ValueError):
    pass


@dataclass(frozen=True)
class CycleCensus:
    """Per-variable-node counts (and ACE sums) of short cycles.

    ``per_node[c]`` holds the number of length-c cycles through each variable
    node; ``ace_sums[c]`` the summed ACE over those cycles (used by
    ace_profile). ``girth`` is None for acyclic graphs, in which case all
    counts are zero and ``lengths`` is empty.
    """

    n: int
    girth: int | None
    lengths: tuple[int, ...]
    per_node: dict[int, np.ndarray]
    totals: dict[int, int]
    ace_sums: dict[int, np.ndarray]

    def node_counts(self, c: int) -> np.ndarray:
        if c in self.per_node:
            return self.per_node[c]
        if self.girth is None or c < self.girth:
            return np.zeros(self.n, dtype=np.int64)
        raise KeyError(f"length {c} not covered by this census")

    def total(self, c: int) -> int:
        if c in self.totals:
            return self.totals[c]
        if self.girth is None or c < self.girth:
            return 0
        raise KeyError(f"length {c} not covered by this census")


@dataclass(frozen=True)
class CycleStats:
    length: int
    total: int
    mean: float
    std: float


@dataclass(frozen=True)
class AceProfile:
    """Per-variable-node average ACE at each census length.

    ``alpha[c][v]`` is NaN when node v lies on no length-c cycle; alpha_min
    is the minimum over the defined entries (NaN when none are defined).
    """

    lengths: tuple[int, ...]
    alpha: dict[int, np.ndarray]
    alpha_min: np.ndarray


def girth(h: SparseBinaryMatrix, kernels=None) -> int | None:
    return graph_girth(h, kernels=kernels)


# ---------------------------------------------------------------------------
# non-backtracking edge structure


def _nb_structure(h: SparseBinaryMatrix):
    """Directed-edge successor CSR for the Tanner graph of h.

    Edge i is the i-th entry of the row-major CSR; directed id 2i is
    variable->check, 2i+1 is check->variable. Returns (n_dir, succ_ptr,
    succ_idx, wt_target, var_src, ecol) where var_src lists the
    variable->check directed ids (the census sources) and ecol the variable
    of each undirected edge.
    """
    ne = h.num_entries
    erow = np.repeat(np.arange(h.rows, dtype=np.int32), h.row_degrees())
    ecol = h.row_idx.astype(np.int32)
    order = np.argsort(ecol, kind="stable")
    col_deg = h.col_degrees()
    col_ptr = np.zeros(h.cols + 1, dtype=np.int64)
    np.cumsum(col_deg, out=col_ptr[1:])

    n_dir = 2 * ne
    deg_of_target = np.empty(n_dir, dtype=np.int64)
    deg_of_target[0::2] = h.row_degrees()[erow]  # target check degree
    deg_of_target[1::2] = col_deg[ecol]
    succ_counts = deg_of_target - 1
    succ_ptr = np.zeros(n_dir + 1, dtype=np.int64)
    np.cumsum(succ_counts, out=succ_ptr[1:])
    succ_idx = np.empty(int(succ_ptr[-1]), dtype=np.int32)

    row_ptr = h.row_ptr
    for i in range(ne):
        # successors of 2i (v -> c): (c -> u) for edges j != i in row c
        c = erow[i]
        js = np.arange(row_ptr[c], row_ptr[c + 1])
        js = js[js != i]
        lo = succ_ptr[2 * i]
        succ_idx[lo : lo + js.size] = 2 * js + 1
        # successors of 2i+1 (c -> v): (v -> d) for edges j != i in column v
        v = ecol[i]
        js = order[col_ptr[v] : col_ptr[v + 1]]
        js = js[js != i]
        lo = succ_ptr[2 * i + 1]
        succ_idx[lo : lo + js.size] = 2 * js

    wt_target = np.zeros(n_dir, dtype=np.int64)
    wt_var = col_deg.astype(np.int64) - 2
    wt_target[1::2] = wt_var[ecol]
    var_src = (2 * order).astype(np.int32)  # grouped by variable
    return n_dir, succ_ptr, succ_idx, wt_target, var_src, ecol[order]


def count_cycles(
    h: SparseBinaryMatrix, lengths=None, kernels=None
) -> CycleCensus:
    """Exact per-variable-node counts of short cycles (default g, g+2, g+4).

    Any requested length must satisfy c <= 2g - 2 or c == 2g; longer counts
    are outside the message-passing regime and raise NotImplementedError.
    """
    kern = kernels or get_backend()
    nvar = h.cols
    g = graph_girth(h, kernels=kern)
    if g is None:
        return CycleCensus(nvar, None, (), {}, {}, {})
    if lengths is None:
        lengths = (g, g + 2, g + 4)
    lengths = tuple(int(c) for c in lengths)
    for c in lengths:
        if c % 2 or c < 4:
            raise ValueError(f"cycle length {c} invalid for a bipartite graph")
        if c > 2 * g - 2 and not (c == 2 * g and g == 4):
            raise NotImplementedError(
                f"length {c} exceeds the countable range for girth {g}"
            )

    per_node: dict[int, np.ndarray] = {}
    ace_sums: dict[int, np.ndarray] = {}
    totals: dict[int, int] = {}
    ks = sorted({c for c in lengths if c >= g})
    if ks:
        n_dir, succ_ptr, succ_idx, wt_target, var_src, src_col = _nb_structure(h)
        counts, aces = kern.nb_walk_diag(
            n_dir, succ_ptr, succ_idx, wt_target, var_src, ks
        )
        for j, c in enumerate(ks):
            raw_cnt = np.bincount(src_col, weights=counts[:, j], minlength=nvar)
            raw_ace = np.bincount(src_col, weights=aces[:, j], minlength=nvar)
            raw_cnt = raw_cnt.astype(np.int64)
            raw_ace = raw_ace.astype(np.int64)
            if c == 2 * g:
                corr_cnt, corr_ace = _two_girth_corrections(h)
                raw_cnt -= corr_cnt
                raw_ace -= corr_ace
            assert not np.any(raw_cnt % 2), "walk counts must pair up per direction"
            assert not np.any(raw_cnt < 0), "correction exceeded walk count"
            per_node[c] = raw_cnt // 2
            ace_sums[c] = raw_ace // 2
            tot = int(per_node[c].sum())
            assert tot % (c // 2) == 0, "incidence identity violated"
            totals[c] = tot // (c // 2)
    for c in lengths:
        if c < g:
            per_node[c] = np.zeros(nvar, dtype=np.int64)
            ace_sums[c] = np.zeros(nvar, dtype=np.int64)
            totals[c] = 0
    return CycleCensus(nvar, g, lengths, per_node, totals, ace_sums)


# ---------------------------------------------------------------------------
# corrections for length 2g on girth-4 graphs


def _enumerate_4cycles(h: SparseBinaryMatrix):
    """All 4-cycles as (v1, v2, c1, c2) with v1 < v2, c1 < c2 (matrix ids)."""
    cycles = []
    rows = [np.asarray(h.row(r)) for r in range(h.rows)]
    for c1, c2 in combinations(range(h.rows), 2):
        common = np.intersect1d(rows[c1], rows[c2], assume_unique=True)
        for v1, v2 in combinations(common.tolist(), 2):
            cycles.append((int(v1), int(v2), c1, c2))
    return cycles


def _two_girth_corrections(h: SparseBinaryMatrix):
    """Per-variable-node count/ACE-sum of the non-cycle TBC walks of length 8.

    Valid only when girth is 4. The walks decompose into ordered pairs of
    4-cycle traversals; the multiplicities per structure class were derived
    from the tailless/backtrackless constraints:

    * one 4-cycle traversed twice: 2 walks per node on it, weight 2*ACE each
    * two 4-cycles sharing one vertex z: 8 walks at z, 4 at other nodes
    * sharing exactly one edge / one 2-path: 4 walks at shared nodes, 2 at
      the private path interiors
    * two same-side vertices with >= 4 common neighbours: 12 walk objects per
      4-subset of neighbours, seen twice by the endpoints, once by interiors
    """
    nvar = h.cols
    wt_var = h.col_degrees().astype(np.int64) - 2
    corr_cnt = np.zeros(nvar, dtype=np.int64)
    corr_ace = np.zeros(nvar, dtype=np.int64)

    cycles = _enumerate_4cycles(h)
    aces = [int(wt_var[v1] + wt_var[v2]) for (v1, v2, _, _) in cycles]

    # class (a): double traversals
    for (v1, v2, _, _), a in zip(cycles, aces):
        for v in (v1, v2):
            corr_cnt[v] += 2
            corr_ace[v] += 4 * a

    # vertex sets with unified check ids for intersection tests
    vsets = [
        frozenset((v1, v2, nvar + c1, nvar + c2)) for (v1, v2, c1, c2) in cycles
    ]
    by_vertex: dict[int, list[int]] = {}
    for i, vs in enumerate(vsets):
        for u in vs:
            by_vertex.setdefault(u, []).append(i)
    pair_seen = set()
    for ids in by_vertex.values():
        for i, j in combinations(ids, 2):
            if (i, j) in pair_seen:
                continue
            pair_seen.add((i, j))
            inter = vsets[i] & vsets[j]
            a_sum = aces[i] + aces[j]
            shared_vars = [u for u in inter if u < nvar]
            union_vars = [u for u in (vsets[i] | vsets[j]) if u < nvar]
            if len(inter) == 1:
                z = next(iter(inter))
                for u in union_vars:
                    w = 8 if u == z else 4
                    corr_cnt[u] += w
                    corr_ace[u] += w * a_sum
            elif len(inter) == 2:
                sides = {u < nvar for u in inter}
                if len(sides) == 1:
                    continue  # same side: handled by the 4-subset structures
                for u in union_vars:
                    w = 4 if u in inter else 2
                    corr_cnt[u] += w
                    corr_ace[u] += w * a_sum
            elif len(inter) == 3:
                for u in union_vars:
                    w = 4 if u in inter else 2
                    corr_cnt[u] += w
                    corr_ace[u] += w * a_sum
            else:  # 4 shared vertices would be the same cycle
                raise AssertionError("distinct 4-cycles cannot share 4 vertices")

    # class (d): two same-side vertices joined by >= 4 disjoint 2-paths
    col_ptr, col_idx = h.col_adjacency()

    # variable pairs with >= 4 common checks
    for v1 in range(nvar):
        checks1 = set(int(r) for r in col_idx[col_ptr[v1] : col_ptr[v1 + 1]])
        for v2 in range(v1 + 1, nvar):
            common = [
                int(r)
                for r in col_idx[col_ptr[v2] : col_ptr[v2 + 1]]
                if int(r) in checks1
            ]
            m = len(common)
            if m >= 4:
                sigma = 2 * (wt_var[v1] + wt_var[v2])
                nstruct = comb(m, 4)
                for v in (v1, v2):
                    corr_cnt[v] += 24 * nstruct
                    corr_ace[v] += 24 * nstruct * sigma
    # check pairs with >= 4 common variables
    rows = [set(int(v) for v in h.row(r)) for r in range(h.rows)]
    for c1 in range(h.rows):
        for c2 in range(c1 + 1, h.rows):
            common = sorted(rows[c1] & rows[c2])
            m = len(common)
            if m >= 4:
                wts = wt_var[common]
                w_total = int(wts.sum())
                for w, wv in zip(common, wts):
                    # interiors see 12 walks per containing 4-subset; the walk
                    # weight is 2*0 (check endpoints) + subset weight sum
                    corr_cnt[w] += 12 * comb(m - 1, 3)
                    corr_ace[w] += 12 * (
                        int(wv) * comb(m - 1, 3)
                        + (w_total - int(wv)) * comb(m - 2, 2)
                    )
    return corr_cnt, corr_ace


# ---------------------------------------------------------------------------
# brute-force oracle


def enumerate_cycles_bruteforce(
    h: SparseBinaryMatrix, max_len: int, col_bound: int = BRUTE_FORCE_COL_BOUND
):
    """Every simple cycle of length <= max_len, once up to rotation/reflection.

    Cycles are vertex tuples in unified ids, starting at their smallest
    vertex, oriented so the second vertex is smaller than the last. Intended
    as a test oracle; refuses matrices wider than ``col_bound``.
    """
    if h.cols > col_bound:
        raise ValueError(
            f"brute-force enumeration refused: {h.cols} columns > bound {col_bound}"
        )
    if max_len < 4:
        return []
    nvar = h.cols
    nvert = nvar + h.rows
    adj: list[list[int]] = [[] for _ in range(nvert)]
    for r in range(h.rows):
        for v in h.row(r):
            adj[int(v)].append(nvar + r)
            adj[nvar + r].append(int(v))
    for lst in adj:
        lst.sort()

    cycles = []
    on_path = np.zeros(nvert, dtype=bool)

    def dfs(root: int, path: list[int]):
        u = path[-1]
        for w in adj[u]:
            if w == root and len(path) >= 3:
                if path[1] < path[-1] and len(path) <= max_len:
                    cycles.append(tuple(path))
            elif w > root and not on_path[w] and len(path) <= max_len - 1:
                on_path[w] = True
                path.append(w)
                dfs(root, path)
                path.pop()
                on_path[w] = False

    for root in range(nvert):
        on_path[root] = True
        dfs(root, [root])
        on_path[root] = False
    return cycles


# ---------------------------------------------------------------------------
# ACE


def ace_of_cycle(cycle, h: SparseBinaryMatrix) -> int:
    """Sum of (degree - 2) over the cycle's variable nodes.

    ``cycle`` is a vertex sequence in unified ids; it must be a genuine
    simple cycle of the Tanner graph.
    """
    n = len(cycle)
    if n < 4 or n % 2:
        raise InvalidCycleError(f"cycle length {n} impossible in a bipartite graph")
    if len(set(cycle)) != n:
        raise InvalidCycleError("repeated vertex")
    nvar = h.cols
    col_deg = h.col_degrees()
    total = 0
    seq = [int(u) for u in cycle]
    for a, b in zip(seq, seq[1:] + seq[:1]):
        va, ca = (a, b) if a < nvar else (b, a)
        if va >= nvar or ca < nvar:
            raise InvalidCycleError(f"edge {a}-{b} does not alternate sides")
        if va not in h.row(ca - nvar):
            raise InvalidCycleError(f"edge {a}-{b} not present in the graph")
    for u in cycle:
        if u < nvar:
            total += int(col_deg[u]) - 2
    return total


def ace_profile(h: SparseBinaryMatrix, census: CycleCensus) -> AceProfile:
    """Average ACE per node at each census length, min-combined per node."""
    nvar = h.cols
    alpha: dict[int, np.ndarray] = {}
    for c in census.lengths:
        cnt = census.per_node[c]
        s = census.ace_sums[c]
        a = np.full(nvar, np.nan)
        mask = cnt > 0
        a[mask] = s[mask] / cnt[mask]
        alpha[c] = a
    if alpha:
        import warnings

        stack = np.vstack([alpha[c] for c in census.lengths])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN rows
            amin = np.nanmin(stack, axis=0)
    else:
        amin = np.full(nvar, np.nan)
    return AceProfile(census.lengths, alpha, amin)


# ---------------------------------------------------------------------------
# statistics and export


def cycle_stats(
    census: CycleCensus, n: int, c: int, population: str = "all"
) -> CycleStats:
    """(N_c, mu_c, sigma_c) over the variable-node counts at length c.

    ``population="all"`` averages over all n variable nodes;
    ``"on_cycle"`` over nodes with a nonzero count (the convention that
    matches the published cycle-distribution tables).
    """
    counts = census.node_counts(c)
    total = census.total(c)
    if population == "all":
        if n <= 0:
            raise ValueError("population size must be positive")
        pad = np.zeros(n, dtype=np.int64)
        pad[: counts.size] = counts
        mu = float(pad.mean())
        sigma = float(pad.std())
    elif population == "on_cycle":
        sel = counts[counts > 0]
        mu = float(sel.mean()) if sel.size else 0.0
        sigma = float(sel.std()) if sel.size else 0.0
    else:
        raise ValueError(f"unknown population {population!r}")
    return CycleStats(length=c, total=total, mean=mu, std=sigma)


def census_to_json(
    census: CycleCensus, population: str = "all"
) -> dict:
    out = {
        "girth": census.girth,
        "lengths": {},
        "per_node": [
            [int(census.per_node[c][v]) for c in census.lengths]
            for v in range(census.n)
        ],
    }
    for c in census.lengths:
        st = cycle_stats(census, census.n, c, population=population)
        out["lengths"][str(c)] = {
            "N_c": st.total,
            "mu_c": st.mean,
            "sigma_c": st.std,
        }
    return out


def save_census(census: CycleCensus, path, population: str = "all") -> None:
    with open(path, "w") as f:
        json.dump(census_to_json(census, population), f, indent=1)
