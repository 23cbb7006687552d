"""BPSK over AWGN, LLR formation (puncture aware) and BP decoding.

Bits map 0 -> +1, 1 -> -1 with unit symbol energy. Noise variance follows
the SNR convention in the config: for E_b/N_0 the resulting rate of the
transmitted code enters the conversion (sigma^2 = 1/(2 R' 10^(dB/10))), for
E_s/N_0 the rate drops out. ``snr_db=inf`` is the noiseless sentinel.

Decoding is flooding sum-product in the log domain with the check-node tanh
rule; message magnitudes are clamped (default 30). A decode is ``converged``
only when the hard word satisfies every check and no posterior is exactly
zero, so undetermined punctured positions are never claimed as decoded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import get_backend
from .gf2 import GeneratorMatrix, SparseBinaryMatrix, encode

DEFAULT_CLAMP = 30.0
LLR_CAP = 1e6  # channel LLR at the noiseless sentinel


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Independent, scheduling-proof stream for (seed, *key)."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key)))
    )


@dataclass(frozen=True)
class ChannelConfig:
    snr_db: float
    rate: float  # resulting rate R' of the transmitted code
    snr_is_es: bool = False  # False: E_b/N_0, True: E_s/N_0
    seed: int = 0

    def noise_variance(self) -> float:
        if math.isinf(self.snr_db):
            return 0.0
        lin = 10.0 ** (self.snr_db / 10.0)
        if self.snr_is_es:
            return 1.0 / (2.0 * lin)
        return 1.0 / (2.0 * float(self.rate) * lin)


@dataclass(frozen=True)
class LlrVector:
    values: np.ndarray  # float64, mother indexing (length N)
    punctured: np.ndarray  # bool mask, True where no observation


@dataclass(frozen=True)
class DecodeResult:
    message: np.ndarray  # uint8, length K
    hard_word: np.ndarray  # uint8, length N
    converged: bool
    iterations: int


def modulate(bits: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def transmit_rng(bits: np.ndarray, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    s = modulate(bits)
    if sigma2 == 0.0:
        return s
    return s + rng.normal(0.0, math.sqrt(sigma2), size=s.shape)


def transmit(bits: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    """BPSK-modulate and add seeded white Gaussian noise."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    return transmit_rng(bits, cfg.noise_variance(), rng)


def form_llrs(received: np.ndarray, cfg: ChannelConfig, pattern=None) -> LlrVector:
    """Channel LLRs 2y/sigma^2 reinserted at mother positions; punctured
    positions carry exactly 0."""
    received = np.asarray(received, dtype=np.float64)
    sigma2 = cfg.noise_variance()
    if sigma2 == 0.0:
        vals = np.sign(received) * LLR_CAP
    else:
        vals = 2.0 * received / sigma2
    if pattern is None:
        return LlrVector(vals, np.zeros(received.size, dtype=bool))
    if received.size != pattern.n - pattern.p:
        raise ValueError(
            f"received length {received.size} != N-P = {pattern.n - pattern.p}"
        )
    full = np.zeros(pattern.n, dtype=np.float64)
    mask = np.ones(pattern.n, dtype=bool)
    kept = pattern.kept_positions()
    full[kept] = vals
    mask[kept] = False
    return LlrVector(full, mask)


class BpDecoder:
    """Belief-propagation decoder bound to one parity-check matrix.

    Precomputes the edge layout once; ``decode`` is then a pure function of
    the LLR vector, safe to call from multiple workers.
    """

    def __init__(self, h: SparseBinaryMatrix, g: GeneratorMatrix | None = None,
                 clamp: float = DEFAULT_CLAMP, kernels=None):
        self.h = h
        self.g = g
        self.clamp = float(clamp)
        self._kern = kernels or get_backend()
        self._chk_ptr = h.row_ptr.astype(np.int32)
        self._edge_var = h.row_idx.astype(np.int32)
        # var_gather[e] = slot of edge e in the variable-major ordering
        order = np.argsort(self._edge_var, kind="stable")
        gather = np.empty_like(order)
        gather[order] = np.arange(order.size)
        self._var_gather = gather.astype(np.int32)

    def decode(self, llr, max_iters: int) -> DecodeResult:
        values = llr.values if isinstance(llr, LlrVector) else np.asarray(llr, dtype=np.float64)
        if values.shape != (self.h.cols,):
            raise ValueError(f"LLR length {values.shape} != N={self.h.cols}")
        bits, iters, converged = self._kern.bp_decode(
            np.ascontiguousarray(values, dtype=np.float64),
            self._chk_ptr, self._edge_var, self._var_gather,
            int(max_iters), self.clamp,
        )
        bits = np.asarray(bits, dtype=np.uint8)
        msg = bits[self.g.msg_positions] if self.g is not None else bits[:0]
        return DecodeResult(msg, bits, bool(converged), int(iters))


def bp_decode(h: SparseBinaryMatrix, llr, max_iters: int,
              g: GeneratorMatrix | None = None,
              clamp: float = DEFAULT_CLAMP) -> DecodeResult:
    """One-shot decode; build a BpDecoder for repeated use."""
    return BpDecoder(h, g=g, clamp=clamp).decode(llr, max_iters)


def frame_trial(
    decoder: BpDecoder,
    sigma2: float,
    rng: np.random.Generator,
    max_iters: int,
    pattern=None,
) -> tuple[int, bool, int]:
    """Encode a random message, transmit, decode.

    Returns (message bit errors, frame error, iterations). The per-frame rng
    supplies both the message and the noise so trials are independently
    reproducible. The decoder must carry the generator (message extraction).
    """
    g = decoder.g
    if g is None:
        raise ValueError("frame_trial needs a decoder built with a generator")
    m = rng.integers(0, 2, size=g.k).astype(np.uint8)
    c = encode(g, m)
    tx = c if pattern is None else c[pattern.kept_positions()]
    y = transmit_rng(tx, sigma2, rng)
    if sigma2 == 0.0:
        vals = np.sign(y) * LLR_CAP
    else:
        vals = 2.0 * y / sigma2
    if pattern is None:
        llr = vals
    else:
        llr = np.zeros(g.n, dtype=np.float64)
        llr[pattern.kept_positions()] = vals
    res = decoder.decode(llr, max_iters)
    errs = int(np.count_nonzero(res.message != m))
    return errs, errs > 0, res.iterations
