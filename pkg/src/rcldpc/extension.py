"""Multi-level rate-lowering extension of a mother code.

Each level appends B rows and B columns: the new rows carry an identity
block coupling them to the previous level's last B columns and the chosen
B x B submatrix ``h_ext`` on the new columns; everything else stays zero.
Consecutive coupling identities therefore sit on disjoint column sets (no
4-cycles outside h_ext) and every level embeds the previous one as its
leading block. ``h_ext`` is fixed across levels and selected from PEG-built
candidates by the cycle-count or ACE criterion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from pathlib import Path

import numpy as np

from .construction import ConstructionConfig, DegreeDistribution, peg_construct
from .cycles import count_cycles, graph_girth
from .gf2 import (
    GeneratorMatrix,
    SparseBinaryMatrix,
    load_alist,
    load_generator,
    rank_gf2,
    save_alist,
    save_generator,
    systematize,
)


class ExtensionPlanError(ValueError):
    pass


class ExtensionRankError(ValueError):
    """Extension cannot proceed at some level; carries the level index."""

    def __init__(self, level: int, message: str):
        self.level = level
        super().__init__(f"level {level}: {message}")


@dataclass(frozen=True)
class ExtensionPlan:
    """Level geometry solving R_i = K/(N + l_i * B) for every target rate.

    ``levels`` aligns with ``targets``: target i is reached after
    ``levels[i]`` extension blocks of size B. ``num_blocks`` is the ladder
    depth needed to serve all targets (targets need not sit at consecutive
    blocks; every block is still square B x B).
    """

    n: int
    m: int
    k: int
    b: int
    targets: tuple[Fraction, ...]
    levels: tuple[int, ...]

    @property
    def num_targets(self) -> int:
        return len(self.targets)

    @property
    def num_blocks(self) -> int:
        return max(self.levels)

    def rate_at_block(self, l: int) -> Fraction:
        return Fraction(self.k, self.n + l * self.b)

    def to_json(self) -> dict:
        return {
            "N": self.n,
            "M": self.m,
            "K": self.k,
            "B": self.b,
            "targets": [str(t) for t in self.targets],
            "levels": list(self.levels),
        }


def _as_fraction(rate) -> Fraction:
    if isinstance(rate, Fraction):
        return rate
    if isinstance(rate, str):
        try:
            return Fraction(rate)
        except (ValueError, ZeroDivisionError) as exc:
            raise ExtensionPlanError(
                f"target rate {rate!r} is not an exact integer ratio"
            ) from exc
    if isinstance(rate, (tuple, list)) and len(rate) == 2:
        return Fraction(int(rate[0]), int(rate[1]))
    if isinstance(rate, int):
        return Fraction(rate)
    raise ExtensionPlanError(
        f"target rate {rate!r} must be an exact ratio (string 'p/q', Fraction "
        "or integer pair); floats are ambiguous"
    )


def plan_levels(n: int, m: int, targets) -> ExtensionPlan:
    """Find the common block size B realising every target rate exactly.

    Each target R_i needs an integer block length N_i = K / R_i; B is the
    greatest common divisor of the increments N_i - N so every target sits
    an integer number of B-blocks below the mother code.
    """
    k = n - m
    r = Fraction(k, n)
    fr = [_as_fraction(t) for t in targets]
    if not fr:
        raise ExtensionPlanError("no target rates given")
    if any(f2 >= f1 for f1, f2 in zip(fr, fr[1:])):
        raise ExtensionPlanError("target rates must be strictly decreasing")
    if fr[0] >= r:
        raise ExtensionPlanError(f"targets must lie below the mother rate {r}")
    deltas = []
    for t in fr:
        ni = Fraction(k, 1) / t
        if ni.denominator != 1:
            lo = Fraction(k, int(ni) + 1)
            hi = Fraction(k, int(ni))
            raise ExtensionPlanError(
                f"rate {t} needs non-integer block length {ni}; nearest "
                f"feasible rates are {lo} and {hi}"
            )
        deltas.append(int(ni) - n)
    b = 0
    for d in deltas:
        b = gcd(b, d)
    levels = tuple(d // b for d in deltas)
    return ExtensionPlan(n=n, m=m, k=k, b=b, targets=tuple(fr), levels=levels)


# ---------------------------------------------------------------------------
# candidate construction and selection


@dataclass(frozen=True)
class SubmatrixCandidate:
    h: SparseBinaryMatrix
    girth: int | None
    n_girth_cycles: int
    avg_ace: float  # mean ACE over the girth-length cycles, NaN if acyclic
    dist_index: int
    invertible: bool


def build_candidates(
    plan: ExtensionPlan,
    d_v_max: int,
    d_c_max: int,
    distributions,
    seed: int = 0,
    invertible_only: bool = False,
    max_retries: int = 64,
) -> list[SubmatrixCandidate]:
    """PEG-construct one B x B candidate per degree distribution.

    Requires len(distributions) = number of targets + 1. Distributions that
    cannot be quantised for a B x B matrix are skipped with a warning entry;
    if none survive this is an error. ``invertible_only`` reseeds each
    candidate until it is invertible over GF(2) (a ladder built from a
    singular submatrix could not be systematically encoded).
    """
    dists = list(distributions)
    if len(dists) != plan.num_targets + 1:
        raise ValueError(
            f"need S = L+1 = {plan.num_targets + 1} distributions, got {len(dists)}"
        )
    out = []
    for s, dist in enumerate(dists):
        if not isinstance(dist, DegreeDistribution):
            dist = DegreeDistribution.from_pairs(*dist)
        if dist.max_var_degree() > d_v_max or dist.max_chk_degree() > d_c_max:
            raise ValueError(
                f"candidate {s}: degrees exceed bounds d_v<={d_v_max}, d_c<={d_c_max}"
            )
        hs = None
        try:
            for attempt in range(max_retries if invertible_only else 1):
                cfg = ConstructionConfig(
                    n=plan.b, m=plan.b, distribution=dist,
                    seed=seed + s + 1000 * attempt, check_rate=True,
                )
                hs = peg_construct(cfg)
                if not invertible_only or rank_gf2(hs) == plan.b:
                    break
            else:
                raise ValueError(
                    f"no invertible candidate found in {max_retries} attempts"
                )
        except ValueError as exc:
            import warnings

            warnings.warn(f"candidate {s} infeasible for B={plan.b}: {exc}")
            continue
        g = graph_girth(hs)
        if g is None:
            ng, ace = 0, float("nan")
        else:
            census = count_cycles(hs, lengths=(g,))
            ng = census.total(g)
            per_inc = int(census.ace_sums[g].sum())
            # per-node sums count each cycle once per variable incidence
            ace = per_inc / (g // 2) / ng if ng else float("nan")
        out.append(
            SubmatrixCandidate(
                h=hs, girth=g, n_girth_cycles=ng, avg_ace=ace,
                dist_index=s, invertible=rank_gf2(hs) == plan.b,
            )
        )
    if not out:
        raise ValueError("all candidate distributions were infeasible")
    return out


def select_cc(candidates) -> SubmatrixCandidate:
    """Largest local girth, then fewest girth-length cycles, then first."""
    cands = list(candidates)
    if not cands:
        raise ValueError("empty candidate list")
    return min(
        cands,
        key=lambda c: (-(c.girth if c.girth is not None else 10**9),
                       c.n_girth_cycles,
                       cands.index(c)),
    )


def select_ace(candidates) -> SubmatrixCandidate:
    """Largest average girth-cycle ACE, then larger girth, then first."""
    cands = list(candidates)
    if not cands:
        raise ValueError("empty candidate list")

    def key(c):
        ace = c.avg_ace
        if ace != ace:  # acyclic candidate: no cycles to harm connectivity
            ace = float("inf")
        return (-ace, -(c.girth if c.girth is not None else 10**9), cands.index(c))

    return min(cands, key=key)


# ---------------------------------------------------------------------------
# ladder assembly


@dataclass(frozen=True)
class ExtensionLadder:
    mother: SparseBinaryMatrix
    mother_gen: GeneratorMatrix
    h_ext: SparseBinaryMatrix
    plan: ExtensionPlan
    matrices: tuple[SparseBinaryMatrix, ...]  # level 1..num_blocks
    generators: tuple[GeneratorMatrix, ...]

    def matrix_at(self, level: int) -> SparseBinaryMatrix:
        return self.mother if level == 0 else self.matrices[level - 1]

    def generator_at(self, level: int) -> GeneratorMatrix:
        return self.mother_gen if level == 0 else self.generators[level - 1]

    def level_for_rate(self, rate) -> int:
        target = _as_fraction(rate)
        for lvl in range(self.plan.num_blocks + 1):
            if self.plan.rate_at_block(lvl) == target:
                return lvl
        raise KeyError(f"rate {target} not on this ladder")


def extend(
    h: SparseBinaryMatrix,
    h_ext: SparseBinaryMatrix,
    plan: ExtensionPlan,
    spread_coupling: bool = True,
) -> ExtensionLadder:
    """Grow the ladder level by level and systematise each stage.

    Each level's B new rows carry ``h_ext`` on the B new columns, an
    identity block on the previous level's last B columns, and (with
    ``spread_coupling``, the default) a second identity block on a walking
    window of the mother's leftmost columns, offset per level so every new
    check also re-protects information bits directly. Without the second
    block the extension chain hangs off one mother block only and the
    derived low-rate codes are measurably weaker. The window alignment is
    shifted until no existing row shares two columns with a new row, so no
    4-cycles are introduced; mothers shorter than 2B fall back to the
    single-coupling form.

    ``h_ext`` must be invertible over GF(2): together with the chain
    coupling that keeps every level full rank and pins the message
    positions inside the mother block, so one deepest-level encoding embeds
    valid codewords of every smaller level (rate-compatible incremental
    bits).
    """
    b = plan.b
    if h_ext.rows != b or h_ext.cols != b:
        raise ValueError(f"h_ext must be {b}x{b}, got {h_ext.rows}x{h_ext.cols}")
    if h.cols < b:
        raise ValueError("mother block length shorter than one extension block")
    if rank_gf2(h_ext) != b:
        raise ExtensionRankError(
            1, "h_ext is singular over GF(2); extension parity would not be "
               "systematically encodable"
        )
    g0, _ = systematize(h)
    mats = []
    gens = []
    rows = [h.row(r).tolist() for r in range(h.rows)]
    n0 = h.cols
    col_rows: list[set[int]] = [set() for _ in range(n0 + plan.num_blocks * b)]
    for r, cols in enumerate(rows):
        for c in cols:
            col_rows[c].add(r)

    for lvl in range(1, plan.num_blocks + 1):
        prev_cols_start = n0 + (lvl - 2) * b if lvl >= 2 else n0 - b
        new_cols_start = n0 + (lvl - 1) * b
        spread_base = None
        shift = 0
        if spread_coupling and n0 >= 2 * b:
            # walking window over the leftmost (information) columns
            nwin = max(1, (n0 - b) // b)
            spread_base = ((lvl - 1) % nwin) * b
            shift = _collision_free_shift(
                col_rows, spread_base, prev_cols_start, b
            )
            if shift < 0:
                spread_base = None
        for i in range(b):
            row = [prev_cols_start + i]
            if spread_base is not None:
                row.append(spread_base + ((i + shift) % b))
            row.extend(new_cols_start + int(c) for c in h_ext.row(i))
            row = sorted(row)
            for c in row:
                col_rows[c].add(len(rows))
            rows.append(row)
        hl = SparseBinaryMatrix.from_entries(
            h.rows + lvl * b, n0 + lvl * b, rows
        )
        gl, _ = systematize(hl)
        if gl.k != plan.k:
            raise ExtensionRankError(lvl, f"rank deficiency: K became {gl.k}")
        if not np.array_equal(gl.msg_positions, g0.msg_positions):
            raise ExtensionRankError(
                lvl, "message positions drifted out of the mother block"
            )
        mats.append(hl)
        gens.append(gl)
    return ExtensionLadder(
        mother=h, mother_gen=g0, h_ext=h_ext, plan=plan,
        matrices=tuple(mats), generators=tuple(gens),
    )


def _collision_free_shift(col_rows, base_a, base_b, b) -> int:
    """Alignment shift s so no existing row holds both coupled columns
    (base_a + (i+s) mod b, base_b + i) of any new row; -1 if none exists."""
    for s in range(b):
        ok = True
        for i in range(b):
            a = base_a + ((i + s) % b)
            if col_rows[a] & col_rows[base_b + i]:
                ok = False
                break
        if ok:
            return s
    return -1


# ---------------------------------------------------------------------------
# persistence


def save_ladder(ladder: ExtensionLadder, directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    save_alist(ladder.mother, d / "mother.alist")
    save_alist(ladder.h_ext, d / "h_ext.alist")
    save_generator(ladder.mother_gen, d / "mother.gen")
    manifest = {
        "plan": ladder.plan.to_json(),
        "mother": {
            "alist": "mother.alist",
            "gen": "mother.gen",
            "hash": ladder.mother.content_hash(),
        },
        "h_ext": {"alist": "h_ext.alist", "hash": ladder.h_ext.content_hash()},
        "levels": [],
    }
    parent_hash = ladder.mother.content_hash()
    for lvl in range(1, ladder.plan.num_blocks + 1):
        hl = ladder.matrix_at(lvl)
        name = f"level_{lvl:02d}"
        save_alist(hl, d / f"{name}.alist")
        save_generator(ladder.generator_at(lvl), d / f"{name}.gen")
        manifest["levels"].append(
            {
                "level": lvl,
                "rate": str(ladder.plan.rate_at_block(lvl)),
                "dims": [hl.rows, hl.cols],
                "parent_hash": parent_hash,
                "hash": hl.content_hash(),
                "alist": f"{name}.alist",
                "gen": f"{name}.gen",
            }
        )
        parent_hash = hl.content_hash()
    with open(d / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=1)


def load_ladder(directory) -> ExtensionLadder:
    d = Path(directory)
    with open(d / "manifest.json") as f:
        manifest = json.load(f)
    pl = manifest["plan"]
    plan = ExtensionPlan(
        n=pl["N"], m=pl["M"], k=pl["K"], b=pl["B"],
        targets=tuple(Fraction(t) for t in pl["targets"]),
        levels=tuple(pl["levels"]),
    )
    mother = load_alist(d / manifest["mother"]["alist"])
    if mother.content_hash() != manifest["mother"]["hash"]:
        raise ValueError("mother alist hash mismatch")
    h_ext = load_alist(d / manifest["h_ext"]["alist"])
    if h_ext.content_hash() != manifest["h_ext"]["hash"]:
        raise ValueError("h_ext alist hash mismatch")
    mother_gen = load_generator(d / manifest["mother"]["gen"])
    mats = []
    gens = []
    for entry in manifest["levels"]:
        hl = load_alist(d / entry["alist"])
        if hl.content_hash() != entry["hash"]:
            raise ValueError(f"level {entry['level']} alist hash mismatch")
        mats.append(hl)
        gens.append(load_generator(d / entry["gen"]))
    return ExtensionLadder(
        mother=mother, mother_gen=mother_gen, h_ext=h_ext, plan=plan,
        matrices=tuple(mats), generators=tuple(gens),
    )
