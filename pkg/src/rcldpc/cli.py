"""Command-line front end.

Subcommands mirror the workflow stages: construct a mother code, analyze its
cycle structure, derive puncturing patterns or extension ladders, simulate
BER/FER, and evaluate hybrid-ARQ throughput. Every artifact embeds the
config that produced it plus content hashes; ``--manifest`` maintains a
workspace file whose entries are re-verified on every use.

Exit codes: 0 success, 2 usage, 3 bad configuration, 4 bad data
(parse/hash mismatch), 5 unsupported or infeasible request. Errors print a
single machine-parsable line ``error: <category>: <message>`` on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .construction import (
    ConstructionConfig,
    DegreeDistribution,
    InfeasibleDistributionError,
    construction_report,
    peg_construct,
)
from .cycles import ace_profile, census_to_json, count_cycles, cycle_stats
from .extension import (
    ExtensionPlanError,
    ExtensionRankError,
    build_candidates,
    extend,
    load_ladder,
    plan_levels,
    save_ladder,
    select_ace,
    select_cc,
)
from .gf2 import (
    AlistError,
    RankDeficientError,
    load_alist,
    load_generator,
    save_alist,
    save_generator,
    systematize,
)
from .harness import (
    SweepConfig,
    arq_policy_from_family,
    emit_report,
    load_report_json,
    run_arq_throughput,
    run_sweep,
)
from .puncture import (
    PatternMismatchError,
    SimPuncturingConfig,
    UnsupportedCodeError,
    ace_puncture,
    cc_puncture,
    load_pattern,
    p_for_target_rate,
    random_pattern,
    save_pattern,
    sim_puncture,
    verify_pattern,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_DATA = 4
EXIT_UNSUPPORTED = 5


class CliError(Exception):
    def __init__(self, category: str, message: str, code: int):
        self.category = category
        self.code = code
        super().__init__(message)


# ---------------------------------------------------------------------------
# workspace manifest


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest_add(manifest_path, artifact_path, config: dict | None) -> None:
    mp = Path(manifest_path)
    data = {"artifacts": {}}
    if mp.exists():
        data = json.loads(mp.read_text())
    data["artifacts"][str(artifact_path)] = {
        "sha256": _sha256(artifact_path),
        "config": config or {},
    }
    mp.write_text(json.dumps(data, indent=1, sort_keys=True))


def manifest_verify(manifest_path) -> None:
    mp = Path(manifest_path)
    if not mp.exists():
        return
    data = json.loads(mp.read_text())
    for path, entry in data.get("artifacts", {}).items():
        if not Path(path).exists():
            raise CliError("data", f"manifest references missing file {path}", EXIT_DATA)
        if _sha256(path) != entry["sha256"]:
            raise CliError("data", f"hash mismatch for {path}", EXIT_DATA)


def _record(args, artifact, config) -> None:
    if getattr(args, "manifest", None):
        manifest_add(args.manifest, artifact, config)


# ---------------------------------------------------------------------------
# helpers


def _load_h(path):
    try:
        return load_alist(path)
    except AlistError as exc:
        raise CliError("data", str(exc), EXIT_DATA) from exc


def _load_or_make_generator(args, h):
    if getattr(args, "gen", None):
        return load_generator(args.gen)
    try:
        g, _ = systematize(h)
    except RankDeficientError as exc:
        if getattr(args, "drop_dependent_rows", False):
            print(
                f"warning: dropping dependent rows {exc.dependent_rows}",
                file=sys.stderr,
            )
            g, _ = systematize(h, allow_rank_deficient=True)
        else:
            raise CliError(
                "data",
                f"{exc}; pass --drop-dependent-rows to proceed",
                EXIT_DATA,
            ) from exc
    return g


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise CliError("config", f"bad SNR grid {text!r}", EXIT_CONFIG) from exc


def _sweep_config(args) -> SweepConfig:
    return SweepConfig(
        snr_grid_db=_parse_grid(args.snr_grid),
        max_iters=args.max_iters,
        min_frame_errors=args.stop_frame_errors,
        max_frames=args.max_frames,
        seed=args.seed,
        snr_is_es=args.es,
        workers=args.workers,
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_construct(args) -> int:
    with open(args.config) as f:
        payload = json.load(f)
    if args.seed is not None:
        payload["seed"] = args.seed
    cfg = ConstructionConfig.from_json(payload)
    h = peg_construct(cfg)
    save_alist(h, args.out)
    report = construction_report(h, cfg)
    report_path = args.report or (str(args.out) + ".report.json")
    with open(report_path, "w") as f:
        json.dump(report, f, indent=1, sort_keys=True)
    _record(args, args.out, cfg.to_json())
    _record(args, report_path, cfg.to_json())
    print(f"constructed N={report['N']} M={report['M']} girth={report['girth']} -> {args.out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    h = _load_h(args.alist)
    lengths = None
    if args.lengths:
        lengths = tuple(int(x) for x in args.lengths.split(","))
    census = count_cycles(h, lengths=lengths)
    out = census_to_json(census, population=args.population)
    out["hash"] = h.content_hash()
    if args.ace:
        prof = ace_profile(h, census)
        out["ace"] = {
            "alpha_min": [None if np.isnan(v) else v for v in prof.alpha_min],
        }
    with open(args.out, "w") as f:
        json.dump(out, f, indent=1)
    _record(args, args.out, {"alist": str(args.alist), "population": args.population})
    print(f"girth={census.girth} totals={census.totals} -> {args.out}")
    return EXIT_OK


def _resolve_p(args, h, k) -> int:
    if args.punctured_bits is not None:
        return args.punctured_bits
    if not args.target_rate:
        raise CliError("config", "need --target-rate or -P", EXIT_CONFIG)
    target = Fraction(args.target_rate)
    p = p_for_target_rate(h.cols, k, target)
    if Fraction(k, h.cols - p) != target:
        print(
            f"warning: P={p} gives rate {Fraction(k, h.cols - p)}, not exactly {target}",
            file=sys.stderr,
        )
    return p


def cmd_puncture(args) -> int:
    h = _load_h(args.alist)
    g = _load_or_make_generator(args, h)
    p = _resolve_p(args, h, g.k)
    if args.scheme == "cc":
        pattern = cc_puncture(h, g.k, p, order=args.order)
    elif args.scheme == "ace":
        pattern = ace_puncture(h, g.k, p)
    elif args.scheme == "random":
        from .channel import rng_stream

        pattern = random_pattern(h, g.k, p, rng_stream(args.seed, 99))
    else:  # sim
        cfg = SimPuncturingConfig(
            q=args.sim_q,
            snr_grid_db=_parse_grid(args.sim_snr_grid),
            repetitions=args.sim_reps,
            training_bits=args.sim_training_bits,
            seed=args.seed,
            max_iters=args.max_iters,
        )
        pattern, table = sim_puncture(h, g, g.k, p, cfg, workers=args.workers)
        if args.sim_table:
            with open(args.sim_table, "w") as f:
                json.dump(table, f, indent=1)
    save_pattern(pattern, args.out)
    _record(args, args.out, pattern.to_json())
    print(
        f"scheme={pattern.scheme} P={pattern.p} R'={pattern.resulting_rate} "
        f"rho={pattern.puncturing_rate} -> {args.out}"
    )
    return EXIT_OK


def cmd_extend(args) -> int:
    h = _load_h(args.alist)
    with open(args.candidates) as f:
        spec = json.load(f)
    plan = plan_levels(h.cols, h.rows, args.targets.split(","))
    dists = [
        DegreeDistribution.from_pairs(d["mu"], d["nu"]) for d in spec["distributions"]
    ]
    cands = build_candidates(
        plan,
        d_v_max=spec.get("d_v_max", 7),
        d_c_max=spec.get("d_c_max", 30),
        distributions=dists,
        seed=args.seed,
        invertible_only=True,
    )
    chosen = select_cc(cands) if args.select == "cc" else select_ace(cands)
    ladder = extend(h, chosen.h, plan)
    save_ladder(ladder, args.out_dir)
    _record(args, str(Path(args.out_dir) / "manifest.json"), plan.to_json())
    print(
        f"ladder B={plan.b} blocks={plan.num_blocks} select={args.select} "
        f"candidate={chosen.dist_index} (girth={chosen.girth}, N_g={chosen.n_girth_cycles}, "
        f"ace={chosen.avg_ace:.2f}) -> {args.out_dir}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    pattern = None
    if args.ladder:
        ladder = load_ladder(args.ladder)
        lvl = args.level if args.level is not None else ladder.plan.num_blocks
        h = ladder.matrix_at(lvl)
        g = ladder.generator_at(lvl)
        label = args.label or f"ext_l{lvl}"
    else:
        h = _load_h(args.alist)
        g = _load_or_make_generator(args, h)
        label = args.label or Path(args.alist).stem
        if args.pattern:
            pattern = load_pattern(args.pattern)
            verify_pattern(pattern, h)
    cfg = _sweep_config(args)
    report = run_sweep(h, g, cfg, pattern=pattern, label=label)
    emit_report(report, args.out, fmt=args.format)
    _record(args, args.out, cfg.to_json())
    for r in report.records:
        print(
            f"{r.snr_db} dB: frames={r.frames} ber={r.ber(report.k):.3e} "
            f"fer={r.fer:.3e} iters={r.mean_iters:.1f}"
        )
    return EXIT_OK


def cmd_throughput(args) -> int:
    h = _load_h(args.alist)
    patterns = []
    for ppath in (args.patterns.split(",") if args.patterns else []):
        pat = load_pattern(ppath)
        verify_pattern(pat, h)
        patterns.append(pat)
    ladder = load_ladder(args.ladder) if args.ladder else None
    levels = [int(x) for x in args.levels.split(",")] if args.levels else None
    policy = arq_policy_from_family(
        h, patterns, ladder=ladder, levels=levels,
        max_transmissions=args.max_tx,
    )
    cfg = _sweep_config(args)
    report = run_arq_throughput(policy, cfg)
    emit_report(report, args.out, fmt=args.format)
    _record(args, args.out, cfg.to_json())
    for r in report.records:
        print(f"{r.snr_db} dB: throughput={r.throughput:.4f} over {r.frames} frames")
    return EXIT_OK


def cmd_report(args) -> int:
    report = load_report_json(args.infile)
    emit_report(report, args.out, fmt=args.format)
    print(f"{args.infile} -> {args.out} ({args.format})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rcldpc",
        description="Rate-compatible LDPC toolkit: construction, cycle-aware "
        "puncturing/extension, BP link simulation.",
    )
    ap.add_argument("--version", action="version", version=f"rcldpc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seeded=True):
        if seeded:
            p.add_argument("--seed", type=int, default=0, help="RNG seed")
        p.add_argument("--manifest", help="workspace manifest to update/verify")

    p = sub.add_parser("construct", help="build a mother code from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output alist path")
    p.add_argument("--report", help="construction report path (default: <out>.report.json)")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("analyze", help="cycle census and distribution statistics")
    p.add_argument("--alist", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lengths", help="comma list, default girth,+2,+4")
    p.add_argument("--population", choices=("all", "on_cycle"), default="all")
    p.add_argument("--ace", action="store_true", help="include per-node min average ACE")
    common(p, seeded=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("puncture", help="derive a puncturing pattern")
    p.add_argument("--alist", required=True)
    p.add_argument("--gen", help="generator file (default: systematize)")
    p.add_argument("--scheme", choices=("cc", "ace", "sim", "random"), required=True)
    p.add_argument("--target-rate", help="exact rational like 5/8")
    p.add_argument("-P", "--punctured-bits", type=int, default=None)
    p.add_argument("--order", choices=("standard", "reverse"), default="standard",
                   help="'reverse' exists only to reproduce the degradation")
    p.add_argument("--out", required=True)
    p.add_argument("--drop-dependent-rows", action="store_true")
    p.add_argument("--max-iters", type=int, default=60)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sim-q", type=int, default=50)
    p.add_argument("--sim-snr-grid", default="1.5,2.0,2.5")
    p.add_argument("--sim-reps", type=int, default=2)
    p.add_argument("--sim-training-bits", type=int, default=1000)
    p.add_argument("--sim-table", help="write the per-pattern BER table here")
    common(p)
    p.set_defaults(func=cmd_puncture)

    p = sub.add_parser("extend", help="build a rate-lowering extension ladder")
    p.add_argument("--alist", required=True)
    p.add_argument("--targets", "--levels", required=True,
                   help="comma list of exact target rates, e.g. 5/12,5/13,5/14")
    p.add_argument("--candidates", required=True, help="JSON file with candidate distributions")
    p.add_argument("--select", choices=("cc", "ace"), default="ace")
    p.add_argument("--out-dir", required=True)
    common(p)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("simulate", help="BER/FER sweep for one code")
    p.add_argument("--alist")
    p.add_argument("--gen")
    p.add_argument("--pattern")
    p.add_argument("--ladder", help="ladder directory (alternative to --alist)")
    p.add_argument("--level", type=int, help="ladder level to simulate")
    p.add_argument("--label")
    p.add_argument("--snr-grid", required=True)
    p.add_argument("--es", action="store_true", help="grid is E_s/N_0 (default E_b/N_0)")
    p.add_argument("--max-iters", type=int, default=60)
    p.add_argument("--stop-frame-errors", type=int, default=100)
    p.add_argument("--max-frames", type=int, default=200_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", required=True)
    p.add_argument("--drop-dependent-rows", action="store_true")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("throughput", help="type-II hybrid-ARQ throughput over a code family")
    p.add_argument("--alist", required=True, help="mother code")
    p.add_argument("--patterns", help="comma list of nested pattern files, highest rate first")
    p.add_argument("--ladder", help="extension ladder directory")
    p.add_argument("--levels", help="comma list of ladder levels (default all)")
    p.add_argument("--max-tx", type=int, default=1)
    p.add_argument("--snr-grid", required=True)
    p.add_argument("--es", action="store_true", default=True,
                   help="grid is E_s/N_0 (throughput convention)")
    p.add_argument("--max-iters", type=int, default=60)
    p.add_argument("--stop-frame-errors", type=int, default=100)
    p.add_argument("--max-frames", type=int, default=20_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_throughput)

    p = sub.add_parser("report", help="convert a JSON report to CSV (or back)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if getattr(args, "manifest", None):
            manifest_verify(args.manifest)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return exc.code
    except (AlistError, PatternMismatchError, RankDeficientError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (
        UnsupportedCodeError,
        InfeasibleDistributionError,
        ExtensionPlanError,
        ExtensionRankError,
        NotImplementedError,
    ) as exc:
        print(f"error: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
