"""Kernel backend selection.

The hot loops (girth search, non-backtracking walk census, BP decoding, PEG
neighbourhood expansion) exist twice: a Cython extension (``_core``) and a
pure NumPy/SciPy fallback (``pure``). The compiled backend is used when the
extension built; ``RCLDPC_KERNELS=pure`` or ``=compiled`` overrides.

``get_backend(name)`` returns the module so benchmarks and parity tests can
pin one explicitly.
"""

from __future__ import annotations

import os

from . import pure

try:
    from . import _core
except ImportError:  # extension not built; pure fallback
    _core = None


def get_backend(name: str | None = None):
    if name is None:
        name = os.environ.get("RCLDPC_KERNELS", "").strip().lower() or None
    if name in (None, "auto"):
        return _core if _core is not None else pure
    if name == "compiled":
        if _core is None:
            raise RuntimeError(
                "compiled kernels requested but rcldpc._kernels._core is not built"
            )
        return _core
    if name == "pure":
        return pure
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends() -> list[str]:
    return ["compiled", "pure"] if _core is not None else ["pure"]


backend = get_backend()
BACKEND_NAME = backend.BACKEND_NAME
