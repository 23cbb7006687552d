#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure NumPy/SciPy fallback.

Runs the four hot paths (PEG construction, girth, cycle census, BP decode)
on a mid-size code with both backends and prints a timing table.

    python benchmarks/bench_kernels.py [--n 1000] [--frames 50]
"""

import argparse
import time

import numpy as np

from rcldpc._kernels import available_backends, get_backend
from rcldpc.channel import BpDecoder, frame_trial, rng_stream
from rcldpc.construction import ConstructionConfig, DegreeDistribution, graph_girth, peg_construct
from rcldpc.cycles import count_cycles
from rcldpc.gf2 import systematize


def bench(n: int, frames: int) -> None:
    mu = [[0.21, 5], [0.25, 3], [0.25, 2], [0.29, 1]]
    dist = DegreeDistribution.from_pairs(mu, [[1.0, 5]])
    cfg = ConstructionConfig(n=n, m=n // 2, distribution=dist, seed=7)

    rows = {}
    h_ref = None
    for name in available_backends():
        kern = get_backend(name)
        t0 = time.perf_counter()
        h = peg_construct(cfg, kernels=kern)
        t_peg = time.perf_counter() - t0
        if h_ref is None:
            h_ref = h
        else:
            assert h == h_ref, "backends disagree on PEG output"

        t0 = time.perf_counter()
        g = graph_girth(h, kernels=kern)
        t_girth = time.perf_counter() - t0

        t0 = time.perf_counter()
        census = count_cycles(h, kernels=kern)
        t_census = time.perf_counter() - t0

        gen, _ = systematize(h)
        dec = BpDecoder(h, g=gen, kernels=kern)
        sigma2 = 1.0 / (2.0 * 0.5 * 10 ** (1.5 / 10))
        rng = rng_stream(1, 0)
        t0 = time.perf_counter()
        for _ in range(frames):
            frame_trial(dec, sigma2, rng, 60)
        t_bp = (time.perf_counter() - t0) / frames

        rows[name] = (t_peg, t_girth, t_census, t_bp, g, census.totals)

    print(f"\ncode: N={n}, M={n // 2}, girth={rows[next(iter(rows))][4]}")
    print(f"{'backend':10s} {'peg (s)':>10s} {'girth (s)':>10s} {'census (s)':>11s} {'bp (ms/frame)':>14s}")
    for name, (t_peg, t_girth, t_census, t_bp, _, _) in rows.items():
        print(f"{name:10s} {t_peg:10.3f} {t_girth:10.3f} {t_census:11.3f} {t_bp * 1e3:14.3f}")
    if len(rows) == 2:
        a, b = (rows["pure"], rows["compiled"])
        print(
            f"{'speedup':10s} {a[0] / b[0]:10.1f}x {a[1] / b[1]:9.1f}x "
            f"{a[2] / b[2]:10.1f}x {a[3] / b[3]:13.1f}x"
        )


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--frames", type=int, default=50)
    args = ap.parse_args()
    bench(args.n, args.frames)
