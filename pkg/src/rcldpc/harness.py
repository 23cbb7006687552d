"""Monte Carlo link evaluation: BER/FER sweeps, the simulation-puncturing
search driver, and type-II hybrid-ARQ throughput.

Reproducibility contract: every frame draws its message and noise from a
Philox stream keyed by (seed, snr index, frame index[, attempt]), frames are
processed in fixed-size batches, and tallies are integers reduced in frame
order, so a report is byte-identical for any worker count. Stop rules fire
at batch granularity: a record ends with either >= the configured frame
errors or the frame cap.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import BpDecoder, DEFAULT_CLAMP, LLR_CAP, frame_trial, rng_stream, transmit_rng
from .gf2 import GeneratorMatrix, SparseBinaryMatrix, encode
from .puncture import PuncturingPattern, SimPuncturingConfig, sim_puncture

BATCH_FRAMES = 256
CSV_COLUMNS = ("snr_db", "frames", "bit_errors", "frame_errors", "ber", "fer", "mean_iters")
ARQ_CSV_COLUMNS = ("snr_db", "frames", "delivered_bits", "channel_uses", "throughput")


@dataclass(frozen=True)
class SweepConfig:
    snr_grid_db: tuple[float, ...]
    max_iters: int = 60
    min_frame_errors: int = 100
    max_frames: int = 200_000
    seed: int = 0
    snr_is_es: bool = False
    workers: int = 1
    clamp: float = DEFAULT_CLAMP

    def __post_init__(self):
        if not self.snr_grid_db:
            raise ValueError("empty SNR grid")
        if self.min_frame_errors <= 0 or self.max_frames <= 0 or self.max_iters <= 0:
            raise ValueError("stop rules and iteration cap must be positive")

    def sigma2(self, snr_db: float, rate: float) -> float:
        if math.isinf(snr_db):
            return 0.0
        lin = 10.0 ** (snr_db / 10.0)
        return 1.0 / (2.0 * lin) if self.snr_is_es else 1.0 / (2.0 * rate * lin)

    def to_json(self) -> dict:
        return {
            "snr_grid_db": list(self.snr_grid_db),
            "max_iters": self.max_iters,
            "min_frame_errors": self.min_frame_errors,
            "max_frames": self.max_frames,
            "seed": self.seed,
            "snr_is_es": self.snr_is_es,
            "workers": self.workers,
            "clamp": self.clamp,
        }


@dataclass(frozen=True)
class SnrRecord:
    snr_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    mean_iters: float
    bit_errors_sq: int  # sum of squared per-frame message errors (variance)

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    def ber(self, k: int) -> float:
        return self.bit_errors / (self.frames * k) if self.frames else 0.0


@dataclass(frozen=True)
class SimReport:
    code: dict
    config: dict
    k: int
    records: tuple[SnrRecord, ...]

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "config": self.config,
            "K": self.k,
            "records": [
                {
                    "snr_db": r.snr_db,
                    "frames": r.frames,
                    "bit_errors": r.bit_errors,
                    "frame_errors": r.frame_errors,
                    "ber": r.ber(self.k),
                    "fer": r.fer,
                    "mean_iters": r.mean_iters,
                    "bit_errors_sq": r.bit_errors_sq,
                }
                for r in self.records
            ],
        }

    @staticmethod
    def from_json(payload: dict) -> "SimReport":
        recs = tuple(
            SnrRecord(
                snr_db=float(r["snr_db"]),
                frames=int(r["frames"]),
                bit_errors=int(r["bit_errors"]),
                frame_errors=int(r["frame_errors"]),
                mean_iters=float(r["mean_iters"]),
                bit_errors_sq=int(r.get("bit_errors_sq", 0)),
            )
            for r in payload["records"]
        )
        return SimReport(
            code=payload["code"], config=payload["config"],
            k=int(payload["K"]), records=recs,
        )


# ---------------------------------------------------------------------------
# sweep workers

_WORKER: dict = {}


def _init_sweep_worker(h, g, pattern, clamp):
    _WORKER["decoder"] = BpDecoder(h, g=g, clamp=clamp)
    _WORKER["pattern"] = pattern


def _sweep_chunk(task):
    seed, snr_idx, frame_lo, nframes, sigma2, max_iters = task
    decoder = _WORKER["decoder"]
    pattern = _WORKER["pattern"]
    bit_errs = 0
    frame_errs = 0
    iters_sum = 0
    errs_sq = 0
    for f in range(frame_lo, frame_lo + nframes):
        rng = rng_stream(seed, 0, snr_idx, f)
        errs, ferr, iters = frame_trial(decoder, sigma2, rng, max_iters, pattern)
        bit_errs += errs
        errs_sq += errs * errs
        frame_errs += int(ferr)
        iters_sum += iters
    return bit_errs, frame_errs, iters_sum, errs_sq


def run_sweep(
    h: SparseBinaryMatrix,
    g: GeneratorMatrix,
    cfg: SweepConfig,
    pattern: PuncturingPattern | None = None,
    label: str = "",
) -> SimReport:
    """BER/FER over the SNR grid with the configured stop rules."""
    rate = g.k / (h.cols - (pattern.p if pattern else 0))
    code_info = {
        "label": label,
        "N": h.cols,
        "K": g.k,
        "rate": rate,
        "hash": h.content_hash(),
        "scheme": pattern.scheme if pattern else "unpunctured",
        "pattern_p": pattern.p if pattern else 0,
    }
    pool = None
    try:
        if cfg.workers > 1:
            pool = ProcessPoolExecutor(
                max_workers=cfg.workers,
                initializer=_init_sweep_worker,
                initargs=(h, g, pattern, cfg.clamp),
            )
        else:
            _init_sweep_worker(h, g, pattern, cfg.clamp)
        records = []
        for snr_idx, snr_db in enumerate(cfg.snr_grid_db):
            sigma2 = cfg.sigma2(snr_db, rate)
            frames = 0
            tall = [0, 0, 0, 0]
            while True:
                batch = min(BATCH_FRAMES, cfg.max_frames - frames)
                if batch <= 0:
                    break
                chunk = max(16, -(-batch // max(cfg.workers, 1)))
                tasks = [
                    (cfg.seed, snr_idx, frames + lo, min(chunk, batch - lo),
                     sigma2, cfg.max_iters)
                    for lo in range(0, batch, chunk)
                ]
                if pool is not None:
                    results = list(pool.map(_sweep_chunk, tasks))
                else:
                    results = [_sweep_chunk(t) for t in tasks]
                for res in results:
                    for i in range(4):
                        tall[i] += res[i]
                frames += batch
                if tall[1] >= cfg.min_frame_errors or frames >= cfg.max_frames:
                    break
            records.append(
                SnrRecord(
                    snr_db=snr_db,
                    frames=frames,
                    bit_errors=tall[0],
                    frame_errors=tall[1],
                    mean_iters=tall[2] / frames if frames else 0.0,
                    bit_errors_sq=tall[3],
                )
            )
    finally:
        if pool is not None:
            pool.shutdown()
    return SimReport(code=code_info, config=cfg.to_json(), k=g.k, records=tuple(records))


def run_sim_search(h, g, k, p, cfg: SimPuncturingConfig, workers: int = 1):
    """Simulation-based pattern search; scheduling cannot affect the result."""
    return sim_puncture(h, g, k, p, cfg, workers=workers)


# ---------------------------------------------------------------------------
# hybrid ARQ


@dataclass(frozen=True)
class ArqStage:
    label: str
    h: SparseBinaryMatrix
    reveal: np.ndarray  # newly revealed codeword positions (global indexing)
    rate: float


@dataclass(frozen=True)
class ArqPolicy:
    """Incremental-redundancy ladder from highest to lowest rate.

    The transmitted codeword is fixed by the deepest stage's generator; each
    stage reveals additional positions and decodes with its own matrix, so
    every stage's cumulative set must extend the previous one (checked at
    construction). Feedback is ideal and free; a frame failing the last
    stage is retransmitted from scratch up to ``max_transmissions`` times.
    """

    stages: tuple[ArqStage, ...]
    generator: GeneratorMatrix  # deepest level; message positions in stage-0 span
    k: int
    max_transmissions: int = 1

    def __post_init__(self):
        rates = [s.rate for s in self.stages]
        if any(r2 >= r1 for r1, r2 in zip(rates, rates[1:])):
            raise ValueError("ARQ ladder rates must be strictly decreasing")
        seen: set[int] = set()
        for s in self.stages:
            new = set(int(i) for i in s.reveal)
            if new & seen:
                raise ValueError(f"stage {s.label} re-reveals known positions")
            seen |= new
            if s.h.cols > self.generator.n:
                raise ValueError("stage matrix wider than the ladder codeword")


def arq_policy_from_family(
    mother_h: SparseBinaryMatrix,
    patterns,
    ladder=None,
    levels=None,
    max_transmissions: int = 1,
) -> ArqPolicy:
    """Assemble a policy from nested puncturing patterns and extension levels.

    ``patterns`` are highest rate first (largest P); consecutive patterns
    must be nested. ``levels`` selects which ladder depths join the ladder
    tail (default: all).
    """
    n = mother_h.cols
    if ladder is not None:
        sel = sorted(levels) if levels else list(range(1, ladder.plan.num_blocks + 1))
        gen = ladder.generator_at(max(sel))
    else:
        from .gf2 import systematize

        sel = []
        gen, _ = systematize(mother_h)
    k = gen.k

    stages = []
    prev: set[int] = set()
    for pat in patterns or []:
        kept = set(int(i) for i in pat.kept_positions())
        if prev and not prev <= kept:
            raise ValueError("puncturing patterns are not nested")
        stages.append(
            ArqStage(
                label=f"punct_p{pat.p}",
                h=mother_h,
                reveal=np.array(sorted(kept - prev), dtype=np.int64),
                rate=float(pat.resulting_rate),
            )
        )
        prev = kept
    all_mother = set(range(n))
    if prev != all_mother:
        stages.append(
            ArqStage(
                label="mother",
                h=mother_h,
                reveal=np.array(sorted(all_mother - prev), dtype=np.int64),
                rate=k / n,
            )
        )
    if ladder is not None:
        b = ladder.plan.b
        pos = n
        for lvl in sel:
            hl = ladder.matrix_at(lvl)
            upto = n + lvl * b  # skipped levels' columns ride along
            stages.append(
                ArqStage(
                    label=f"ext_l{lvl}",
                    h=hl,
                    reveal=np.arange(pos, upto, dtype=np.int64),
                    rate=float(ladder.plan.rate_at_block(lvl)),
                )
            )
            pos = upto
    return ArqPolicy(stages=tuple(stages), generator=gen, k=k,
                     max_transmissions=max_transmissions)


@dataclass(frozen=True)
class ArqRecord:
    snr_db: float
    frames: int
    delivered_bits: int
    channel_uses: int
    stage_successes: tuple[int, ...]  # per stage, plus one slot for failures

    @property
    def throughput(self) -> float:
        return self.delivered_bits / self.channel_uses if self.channel_uses else 0.0


@dataclass(frozen=True)
class ArqReport:
    policy: dict
    config: dict
    k: int
    records: tuple[ArqRecord, ...]

    def to_json(self) -> dict:
        return {
            "policy": self.policy,
            "config": self.config,
            "K": self.k,
            "records": [
                {
                    "snr_db": r.snr_db,
                    "frames": r.frames,
                    "delivered_bits": r.delivered_bits,
                    "channel_uses": r.channel_uses,
                    "throughput": r.throughput,
                    "stage_successes": list(r.stage_successes),
                }
                for r in self.records
            ],
        }


def _arq_frame(policy: ArqPolicy, decoders, sigma2, rng, max_iters):
    """One ARQ frame; returns (delivered, uses, success_stage or -1)."""
    g = policy.generator
    m = rng.integers(0, 2, size=g.k).astype(np.uint8)
    cw = encode(g, m)
    uses = 0
    for _attempt in range(policy.max_transmissions):
        y = transmit_rng(cw, sigma2, rng)
        llr_full = (
            np.sign(y) * LLR_CAP if sigma2 == 0.0 else 2.0 * y / sigma2
        )
        revealed = np.zeros(g.n, dtype=bool)
        for sidx, stage in enumerate(policy.stages):
            revealed[stage.reveal] = True
            uses += int(stage.reveal.size)
            nl = stage.h.cols
            llr = np.where(revealed[:nl], llr_full[:nl], 0.0)
            res = decoders[sidx].decode(llr, max_iters)
            if res.converged:
                est = res.hard_word[g.msg_positions]
                return (int(np.count_nonzero(est == m) == g.k) * g.k, uses, sidx)
        # full failure at the lowest rate: frame retransmitted from scratch
    return 0, uses, -1


def run_arq_throughput(policy: ArqPolicy, cfg: SweepConfig) -> ArqReport:
    """Expected information bits per channel use along the SNR grid."""
    decoders = [BpDecoder(s.h, clamp=cfg.clamp) for s in policy.stages]
    records = []
    nstages = len(policy.stages)
    for snr_idx, snr_db in enumerate(cfg.snr_grid_db):
        sigma2 = cfg.sigma2(snr_db, policy.stages[0].rate)
        delivered = 0
        uses = 0
        frames = 0
        stagehits = [0] * (nstages + 1)
        fails = 0
        while True:
            batch = min(BATCH_FRAMES, cfg.max_frames - frames)
            if batch <= 0:
                break
            for f in range(frames, frames + batch):
                rng = rng_stream(cfg.seed, 1, snr_idx, f)
                d, u, sidx = _arq_frame(policy, decoders, sigma2, rng, cfg.max_iters)
                delivered += d
                uses += u
                if sidx < 0 or d == 0:
                    stagehits[nstages] += 1
                    fails += 1
                else:
                    stagehits[sidx] += 1
            frames += batch
            if fails >= cfg.min_frame_errors or frames >= cfg.max_frames:
                break
        records.append(
            ArqRecord(
                snr_db=snr_db, frames=frames, delivered_bits=delivered,
                channel_uses=uses, stage_successes=tuple(stagehits),
            )
        )
    pol_info = {
        "stages": [
            {"label": s.label, "rate": s.rate, "reveal_bits": int(s.reveal.size)}
            for s in policy.stages
        ],
        "K": policy.k,
        "max_transmissions": policy.max_transmissions,
        "feedback": "ideal, zero cost (excluded from channel uses)",
    }
    return ArqReport(policy=pol_info, config=cfg.to_json(), k=policy.k,
                     records=tuple(records))


def awgn_capacity_bits(snr_es_db: float) -> float:
    return math.log2(1.0 + 10.0 ** (snr_es_db / 10.0))


# ---------------------------------------------------------------------------
# report emission


def emit_report(report, path, fmt: str = "csv") -> None:
    """Write a sweep or ARQ report; CSV rows are plot-ready, JSON carries
    the full provenance (configs, seeds, hashes)."""
    if fmt == "json":
        with open(path, "w") as f:
            json.dump(report.to_json(), f, indent=1, sort_keys=True)
        return
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        if isinstance(report, ArqReport):
            w.writerow(ARQ_CSV_COLUMNS)
            for r in report.records:
                w.writerow([r.snr_db, r.frames, r.delivered_bits,
                            r.channel_uses, f"{r.throughput:.10g}"])
        else:
            w.writerow(CSV_COLUMNS)
            for r in report.records:
                w.writerow([
                    r.snr_db, r.frames, r.bit_errors, r.frame_errors,
                    f"{r.ber(report.k):.10g}", f"{r.fer:.10g}",
                    f"{r.mean_iters:.10g}",
                ])


def load_report_json(path) -> SimReport:
    with open(path) as f:
        return SimReport.from_json(json.load(f))


# ---------------------------------------------------------------------------
# statistics helpers for scheme comparisons


def cluster_z_ber(rec_a: SnrRecord, rec_b: SnrRecord, k: int) -> float:
    """z-score for BER(a) < BER(b) with frames as variance clusters.

    Message-bit errors within a frame are correlated, so the naive
    two-proportion variance is replaced by the per-frame empirical variance
    of the error counts.
    """

    def stats(r: SnrRecord):
        n = r.frames
        mean = r.bit_errors / n
        var = max(r.bit_errors_sq / n - mean * mean, 0.0)
        return mean / k, var / (k * k * n)

    pa, va = stats(rec_a)
    pb, vb = stats(rec_b)
    denom = math.sqrt(va + vb)
    if denom == 0.0:
        return 0.0 if pa == pb else math.copysign(math.inf, pb - pa)
    return (pb - pa) / denom
