"""rcldpc: rate-compatible LDPC code toolkit.

Builds finite-length irregular LDPC mother codes (ACE-aware PEG), derives
rate-compatible families by cycle-aware puncturing and multi-level
extension, and evaluates them over BPSK/AWGN with log-domain belief
propagation: BER/FER sweeps, cycle-distribution statistics and type-II
hybrid-ARQ throughput.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND_NAME as kernel_backend  # noqa: F401
