"""Irregular LDPC mother-code construction: progressive edge growth with an
ACE-aware tiebreak.

Degree polynomials are edge-perspective: a term ``coef * x^e`` puts fraction
``coef`` of the edges on nodes of degree ``e + 1``. Variable nodes are laid
out with the highest degrees in the leftmost columns, so information bits
occupy the best-protected positions and puncturing can stay in the parity
region.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._kernels import get_backend
from .gf2 import SparseBinaryMatrix

RATE_SLACK = 0.02


class InfeasibleDistributionError(ValueError):
    pass


@dataclass(frozen=True)
class DegreeDistribution:
    """Edge-perspective variable/check degree polynomials.

    ``mu`` and ``nu`` are lists of (coefficient, exponent) pairs; exponent e
    means node degree e + 1. Coefficients on each side must sum to one.
    """

    mu: tuple[tuple[float, int], ...]
    nu: tuple[tuple[float, int], ...]

    def __post_init__(self):
        for name, side in (("mu", self.mu), ("nu", self.nu)):
            if not side:
                raise ValueError(f"{name}: empty polynomial")
            for coef, exp in side:
                if not (0.0 < coef <= 1.0):
                    raise ValueError(f"{name}: coefficient {coef} outside (0, 1]")
                if int(exp) != exp or exp < 1:
                    raise ValueError(f"{name}: exponent {exp} must be a positive integer")
            total = sum(c for c, _ in side)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"{name}: coefficients sum to {total}, expected 1")
            exps = [e for _, e in side]
            if len(set(exps)) != len(exps):
                raise ValueError(f"{name}: repeated exponent")

    @staticmethod
    def from_pairs(mu, nu) -> "DegreeDistribution":
        return DegreeDistribution(
            tuple((float(c), int(e)) for c, e in mu),
            tuple((float(c), int(e)) for c, e in nu),
        )

    def var_degrees(self) -> list[tuple[float, int]]:
        """(edge fraction, node degree) pairs, variable side."""
        return [(c, e + 1) for c, e in self.mu]

    def chk_degrees(self) -> list[tuple[float, int]]:
        return [(c, e + 1) for c, e in self.nu]

    def design_rate(self) -> float:
        sv = sum(c / d for c, d in self.var_degrees())
        sc = sum(c / d for c, d in self.chk_degrees())
        return 1.0 - sc / sv

    def max_var_degree(self) -> int:
        return max(d for _, d in self.var_degrees())

    def max_chk_degree(self) -> int:
        return max(d for _, d in self.chk_degrees())


@dataclass(frozen=True)
class ConstructionConfig:
    n: int
    m: int
    distribution: DegreeDistribution
    seed: int
    ace_depth: int = 9
    ace_threshold: int = 4
    check_rate: bool = True

    def __post_init__(self):
        # square configs build the rate-0 extension submatrices
        if not (self.n >= self.m > 0):
            raise ValueError(f"need N >= M > 0, got N={self.n}, M={self.m}")
        if self.check_rate:
            target = 1.0 - self.m / self.n
            got = self.distribution.design_rate()
            if abs(got - target) > RATE_SLACK:
                raise ValueError(
                    f"distribution design rate {got:.4f} is more than "
                    f"{RATE_SLACK} from target {target:.4f}"
                )

    @staticmethod
    def from_json(payload: dict) -> "ConstructionConfig":
        dist = DegreeDistribution.from_pairs(payload["mu"], payload["nu"])
        return ConstructionConfig(
            n=int(payload["N"]),
            m=int(payload["M"]),
            distribution=dist,
            seed=int(payload["seed"]),
            ace_depth=int(payload.get("ace_depth", 9)),
            ace_threshold=int(payload.get("ace_threshold", 4)),
        )

    def to_json(self) -> dict:
        return {
            "N": self.n,
            "M": self.m,
            "mu": [[c, e] for c, e in self.distribution.mu],
            "nu": [[c, e] for c, e in self.distribution.nu],
            "seed": self.seed,
            "ace_depth": self.ace_depth,
            "ace_threshold": self.ace_threshold,
        }


def _allocate_counts(fracs: list[tuple[float, int]], total_nodes: int) -> dict[int, int]:
    """Largest-remainder rounding of per-degree node counts to ``total_nodes``."""
    s = sum(c / d for c, d in fracs)
    ideal = {d: total_nodes * (c / d) / s for c, d in fracs}
    counts = {d: int(np.floor(v)) for d, v in ideal.items()}
    short = total_nodes - sum(counts.values())
    remainders = sorted(ideal, key=lambda d: (ideal[d] - counts[d], d), reverse=True)
    for d in remainders[:short]:
        counts[d] += 1
    return {d: c for d, c in counts.items() if c > 0}


def quantize_degrees(
    dist: DegreeDistribution, n: int, m: int
) -> tuple[np.ndarray, np.ndarray]:
    """Integer per-node degree lists realising the distribution on (n, m).

    The variable side is rounded first and fixes the edge count; the check
    side is then reconciled by moving checks between adjacent degree classes
    (the +-1 adjustment on the lowest class) until the edge sums agree.
    Variable degrees come out descending so high-degree nodes sit leftmost.
    """
    var_counts = _allocate_counts(dist.var_degrees(), n)
    var_list = np.array(
        [d for d in sorted(var_counts, reverse=True) for _ in range(var_counts[d])],
        dtype=np.int32,
    )
    edges = int(var_list.sum())
    if edges > n * dist.max_var_degree():
        raise InfeasibleDistributionError(
            f"distribution demands {edges} edges, above N*d_v_max"
        )
    if edges < m:
        raise InfeasibleDistributionError(
            f"{edges} edges cannot cover {m} checks with degree >= 1"
        )

    chk_counts = dict(_allocate_counts(dist.chk_degrees(), m))
    deficit = edges - sum(d * c for d, c in chk_counts.items())
    # bump members of the lowest (resp. highest) degree class one step until
    # the check side carries exactly `edges` edges
    while deficit != 0:
        if deficit > 0:
            d = min(chk_counts)
            take = min(chk_counts[d], deficit)
            chk_counts[d] -= take
            chk_counts[d + 1] = chk_counts.get(d + 1, 0) + take
            deficit -= take
        else:
            d = max(chk_counts)
            if d == 1:
                raise InfeasibleDistributionError(
                    "check side cannot shed edges below degree 1"
                )
            take = min(chk_counts[d], -deficit)
            chk_counts[d] -= take
            chk_counts[d - 1] = chk_counts.get(d - 1, 0) + take
            deficit += take
        chk_counts = {d: c for d, c in chk_counts.items() if c > 0}
    chk_list = np.array(
        [d for d in sorted(chk_counts, reverse=True) for _ in range(chk_counts[d])],
        dtype=np.int32,
    )
    assert int(chk_list.sum()) == edges
    return var_list, chk_list


def peg_construct(cfg: ConstructionConfig, kernels=None) -> SparseBinaryMatrix:
    """Progressive edge growth with capacity-constrained checks.

    Each edge connects its variable to the most distant (ideally unreached)
    check with free capacity, preferring lower current degree; among those
    still tied, the candidate whose would-be shortest cycle has the largest
    ACE wins (ACE capped at cfg.ace_threshold, cycles longer than
    2*ace_depth treated as harmless), and any remaining tie is settled by
    the seeded generator. Deterministic for a fixed config.
    """
    var_deg_target, chk_deg_target = quantize_degrees(cfg.distribution, cfg.n, cfg.m)
    return peg_from_degrees(
        var_deg_target, chk_deg_target, seed=cfg.seed,
        ace_depth=cfg.ace_depth, ace_threshold=cfg.ace_threshold,
        kernels=kernels,
    )


def peg_from_degrees(
    var_deg_target,
    chk_deg_target,
    seed: int = 0,
    ace_depth: int = 9,
    ace_threshold: int = 4,
    kernels=None,
) -> SparseBinaryMatrix:
    """PEG from explicit per-node degree targets (both sides must agree on
    the edge count)."""
    kern = kernels or get_backend()
    var_deg_target = np.asarray(var_deg_target, dtype=np.int32)
    chk_deg_target = np.asarray(chk_deg_target, dtype=np.int32)
    if var_deg_target.sum() != chk_deg_target.sum():
        raise InfeasibleDistributionError(
            "variable and check degree lists disagree on the edge count"
        )
    nv, nc = len(var_deg_target), len(chk_deg_target)
    rng = np.random.Generator(np.random.PCG64(seed))

    var_ptr = np.zeros(nv + 1, dtype=np.int32)
    np.cumsum(var_deg_target, out=var_ptr[1:])
    chk_ptr = np.zeros(nc + 1, dtype=np.int32)
    np.cumsum(chk_deg_target, out=chk_ptr[1:])
    var_adj = np.zeros(var_ptr[-1], dtype=np.int32)
    chk_adj = np.zeros(chk_ptr[-1], dtype=np.int32)
    var_deg = np.zeros(nv, dtype=np.int32)
    chk_deg = np.zeros(nc, dtype=np.int32)
    wt = (var_deg_target.astype(np.int64) - 2)

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
                kern.peg_bfs(v, var_deg, var_ptr, var_adj, chk_deg, chk_ptr,
                             chk_adj, wt, dist_chk, ace_chk)
                usable = open_mask & (dist_chk != 1)  # no duplicate edges
                if not usable.any():
                    raise InfeasibleDistributionError(
                        f"variable {v} cannot place edge {k}: all open checks adjacent"
                    )
                unreached = usable & (dist_chk < 0)
                if unreached.any():
                    cand = np.flatnonzero(unreached)
                    cand = cand[chk_deg[cand] == chk_deg[cand].min()]
                else:
                    cand = np.flatnonzero(usable)
                    far = dist_chk[cand].max()
                    if far == 3:
                        # every open check would close a 4-cycle; try to free
                        # a distant full check by a degree-preserving swap
                        swapped = _swap_repair(
                            v, int(cand[dist_chk[cand] == 3][0]), dist_chk,
                            var_deg, var_ptr, var_adj, chk_deg, chk_ptr, chk_adj,
                        )
                        if swapped >= 0:
                            var_adj[var_ptr[v] + var_deg[v]] = swapped
                            var_deg[v] += 1
                            continue
                    cand = cand[dist_chk[cand] == far]
                    cand = cand[chk_deg[cand] == chk_deg[cand].min()]
                    if cand.size > 1 and far + 1 <= max_cycle:
                        # ACE values at or above the viability threshold are
                        # considered equally safe; ranking them outright
                        # trades girth-cycle count against the scheme
                        # separation the puncturing selectors rely on
                        ace = np.minimum(ace_chk[cand], ace_threshold)
                        cand = cand[ace == ace.max()]
            c = int(cand[rng.integers(cand.size)]) if cand.size > 1 else int(cand[0])
            var_adj[var_ptr[v] + var_deg[v]] = c
            chk_adj[chk_ptr[c] + chk_deg[c]] = v
            var_deg[v] += 1
            chk_deg[c] += 1

    rows = [np.sort(chk_adj[chk_ptr[c] : chk_ptr[c] + chk_deg[c]]) for c in range(nc)]
    return SparseBinaryMatrix.from_entries(nc, nv, rows)


def _swap_repair(v, c_open, dist_chk, var_deg, var_ptr, var_adj,
                 chk_deg, chk_ptr, chk_adj) -> int:
    """Avoid a forced 4-cycle at variable v by re-homing one edge.

    Every open check sits at distance 3 from v. Find a full check c_d far
    from v (>= 5 or unreached) and a member u of it that can move to
    ``c_open`` without closing a 4-cycle; then v connects to c_d instead.
    All degrees are preserved. Returns the check v should join, or -1 when
    no safe swap exists (caller accepts the 4-cycle).
    """
    nc = chk_deg.shape[0]
    open_vars = set(
        int(x) for x in chk_adj[chk_ptr[c_open] : chk_ptr[c_open] + chk_deg[c_open]]
    )
    donors = [c for c in range(nc) if dist_chk[c] < 0 or dist_chk[c] >= 5]
    donors.sort(key=lambda c: (0 if dist_chk[c] < 0 else -dist_chk[c], c))
    for c_d in donors:
        members = chk_adj[chk_ptr[c_d] : chk_ptr[c_d] + chk_deg[c_d]]
        for slot, u in enumerate(members):
            u = int(u)
            if u == v:
                continue
            u_checks = var_adj[var_ptr[u] : var_ptr[u] + var_deg[u]]
            if c_open in u_checks:
                continue
            # u joining c_open must not create a 4-cycle: no other variable of
            # c_open may share one of u's remaining checks
            clash = False
            for uc in u_checks:
                if uc == c_d:
                    continue
                vs = chk_adj[chk_ptr[uc] : chk_ptr[uc] + chk_deg[uc]]
                if any(int(w) in open_vars for w in vs if int(w) != u):
                    clash = True
                    break
            if clash:
                continue
            # execute: (u, c_d) -> (u, c_open); v joins c_d
            chk_adj[chk_ptr[c_d] + slot] = v
            uslot = int(np.flatnonzero(u_checks == c_d)[0])
            var_adj[var_ptr[u] + uslot] = c_open
            chk_adj[chk_ptr[c_open] + chk_deg[c_open]] = u
            chk_deg[c_open] += 1
            return c_d
    return -1


def tanner_adjacency(h: SparseBinaryMatrix):
    """(var_ptr, var_adj, chk_ptr, chk_adj) int32 views of the Tanner graph."""
    col_ptr, col_idx = h.col_adjacency()
    return (
        col_ptr.astype(np.int32),
        col_idx.astype(np.int32),
        h.row_ptr.astype(np.int32),
        h.row_idx.astype(np.int32),
    )


def graph_girth(h: SparseBinaryMatrix, kernels=None) -> int | None:
    """Tanner-graph girth; None when acyclic."""
    kern = kernels or get_backend()
    vp, va, cp, ca = tanner_adjacency(h)
    g = kern.girth(h.cols, vp, va, cp, ca)
    return int(g) if g else None


def construction_report(h: SparseBinaryMatrix, cfg: ConstructionConfig | None = None) -> dict:
    n, m = h.cols, h.rows
    k = n - m
    g = graph_girth(h)
    vdeg = h.col_degrees()
    cdeg = h.row_degrees()
    report = {
        "N": n,
        "M": m,
        "K": k,
        "rate": str(Fraction(k, n)),
        "rate_float": k / n,
        "girth": g,
        "edges": h.num_entries,
        "var_degree_hist": {int(d): int(c) for d, c in zip(*np.unique(vdeg, return_counts=True))},
        "chk_degree_hist": {int(d): int(c) for d, c in zip(*np.unique(cdeg, return_counts=True))},
        "hash": h.content_hash(),
    }
    if cfg is not None:
        report["config"] = cfg.to_json()
    return report


def load_config(path) -> ConstructionConfig:
    with open(path) as f:
        return ConstructionConfig.from_json(json.load(f))


def packaged_config(name: str) -> dict:
    """One of the JSON configs shipped under rcldpc.configs."""
    from importlib.resources import files

    return json.loads(files("rcldpc.configs").joinpath(name).read_text())
