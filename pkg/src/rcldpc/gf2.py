"""Sparse GF(2) parity-check matrices, alist I/O, systematization, encoding.

The on-disk matrix format is the MacKay alist dialect (1-based indices in the
body, zero-padded entry lines). Generator matrices persist as a small binary
format: magic ``RCG2``, version, dimensions, the message/parity column maps
and the bit-packed dense systematic block.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

GEN_MAGIC = b"RCG2"
GEN_VERSION = 1


class AlistError(ValueError):
    """Malformed alist content; message names the offending line."""


class RankDeficientError(ValueError):
    """H has dependent rows; carries the rank and the dependent row indices."""

    def __init__(self, rank: int, dependent_rows: list[int]):
        self.rank = rank
        self.dependent_rows = dependent_rows
        super().__init__(
            f"matrix is rank deficient: rank {rank}, dependent rows {dependent_rows}"
        )


@dataclass(frozen=True)
class SparseBinaryMatrix:
    """Immutable M x N binary matrix stored as per-row sorted column indices.

    ``row_ptr``/``row_idx`` form the CSR structure; the column-major view and
    the unified bipartite adjacency used by the graph kernels are derived
    lazily and cached.
    """

    rows: int
    cols: int
    row_ptr: np.ndarray  # int32, len rows+1
    row_idx: np.ndarray  # int32, len E, sorted within each row
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @staticmethod
    def from_entries(rows: int, cols: int, entries) -> "SparseBinaryMatrix":
        """Build from an iterable of per-row column index lists."""
        ptr = np.zeros(rows + 1, dtype=np.int32)
        idx_parts = []
        for r, cols_r in enumerate(entries):
            arr = np.unique(np.asarray(list(cols_r), dtype=np.int32))
            if arr.size and (arr[0] < 0 or arr[-1] >= cols):
                raise ValueError(f"row {r}: column index out of range [0, {cols})")
            idx_parts.append(arr)
            ptr[r + 1] = ptr[r] + arr.size
        idx = np.concatenate(idx_parts) if idx_parts else np.zeros(0, dtype=np.int32)
        return SparseBinaryMatrix(rows, cols, ptr, idx.astype(np.int32))

    @staticmethod
    def from_dense(a) -> "SparseBinaryMatrix":
        a = np.asarray(a)
        return SparseBinaryMatrix.from_entries(
            a.shape[0], a.shape[1], (np.flatnonzero(row) for row in a)
        )

    # -- basic queries ------------------------------------------------------

    @property
    def num_entries(self) -> int:
        return int(self.row_idx.size)

    def row(self, r: int) -> np.ndarray:
        return self.row_idx[self.row_ptr[r] : self.row_ptr[r + 1]]

    def row_degrees(self) -> np.ndarray:
        return np.diff(self.row_ptr).astype(np.int32)

    def col_degrees(self) -> np.ndarray:
        if "col_deg" not in self._cache:
            self._cache["col_deg"] = np.bincount(
                self.row_idx, minlength=self.cols
            ).astype(np.int32)
        return self._cache["col_deg"]

    def col_adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSC structure: (col_ptr, col_idx) with row ids sorted per column."""
        if "csc" not in self._cache:
            order = np.argsort(self.row_idx, kind="stable")
            col_ptr = np.zeros(self.cols + 1, dtype=np.int32)
            np.cumsum(np.bincount(self.row_idx, minlength=self.cols), out=col_ptr[1:])
            row_of = np.repeat(np.arange(self.rows, dtype=np.int32), self.row_degrees())
            self._cache["csc"] = (col_ptr.astype(np.int32), row_of[order])
        return self._cache["csc"]

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for r in range(self.rows):
            a[r, self.row(r)] = 1
        return a

    def entry_set(self) -> set[tuple[int, int]]:
        return {
            (r, int(c)) for r in range(self.rows) for c in self.row(r)
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseBinaryMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.row_idx, other.row_idx)
        )

    def __hash__(self):
        return hash((self.rows, self.cols, self.row_idx.tobytes()))

    def content_hash(self) -> str:
        """sha256 over the canonical alist serialization."""
        return hashlib.sha256(dumps_alist(self).encode()).hexdigest()

    def packed_rows(self) -> np.ndarray:
        """Dense rows packed to bits (uint8, shape (rows, ceil(cols/8)))."""
        if "packed" not in self._cache:
            self._cache["packed"] = np.packbits(self.to_dense(), axis=1)
        return self._cache["packed"]

    def submatrix_cols(self, keep) -> "SparseBinaryMatrix":
        """Restrict to the given columns (order preserved), reindexed."""
        keep = np.asarray(sorted(keep), dtype=np.int64)
        remap = -np.ones(self.cols, dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        return SparseBinaryMatrix.from_entries(
            self.rows,
            int(keep.size),
            ((remap[c] for c in self.row(r) if remap[c] >= 0) for r in range(self.rows)),
        )

    def multiply_vector(self, v: np.ndarray) -> np.ndarray:
        """H . v over GF(2); v has length cols."""
        v = np.asarray(v, dtype=np.uint8)
        if self.num_entries == 0:
            return np.zeros(self.rows, dtype=np.uint8)
        x = np.concatenate([v[self.row_idx].astype(np.int64), [0]])
        acc = np.add.reduceat(x, self.row_ptr[:-1]) * (np.diff(self.row_ptr) > 0)
        return (acc & 1).astype(np.uint8)


# ---------------------------------------------------------------------------
# alist I/O


def dumps_alist(h: SparseBinaryMatrix) -> str:
    n, m = h.cols, h.rows
    col_ptr, col_idx = h.col_adjacency()
    col_deg = h.col_degrees()
    row_deg = h.row_degrees()
    max_dv = int(col_deg.max()) if n else 0
    max_dc = int(row_deg.max()) if m else 0
    lines = [
        f"{n} {m}",
        f"{max_dv} {max_dc}",
        " ".join(str(int(d)) for d in col_deg),
        " ".join(str(int(d)) for d in row_deg),
    ]
    for c in range(n):
        ents = [str(int(r) + 1) for r in col_idx[col_ptr[c] : col_ptr[c + 1]]]
        ents += ["0"] * (max_dv - len(ents))
        lines.append(" ".join(ents) if ents else "0")
    for r in range(m):
        ents = [str(int(c) + 1) for c in h.row(r)]
        ents += ["0"] * (max_dc - len(ents))
        lines.append(" ".join(ents) if ents else "0")
    return "\n".join(lines) + "\n"


def save_alist(h: SparseBinaryMatrix, path) -> None:
    Path(path).write_text(dumps_alist(h))


def loads_alist(text: str) -> SparseBinaryMatrix:
    lines = text.splitlines()

    def ints(lineno: int, expect: int | None = None) -> list[int]:
        if lineno >= len(lines):
            raise AlistError(f"line {lineno + 1}: unexpected end of file")
        try:
            vals = [int(tok) for tok in lines[lineno].split()]
        except ValueError:
            raise AlistError(f"line {lineno + 1}: non-integer token") from None
        if expect is not None and len(vals) != expect:
            raise AlistError(
                f"line {lineno + 1}: expected {expect} values, found {len(vals)}"
            )
        return vals

    hdr = ints(0)
    if len(hdr) != 2 or hdr[0] < 0 or hdr[1] < 0:
        raise AlistError("line 1: header must be 'N M'")
    n, m = hdr
    maxs = ints(1)
    if len(maxs) != 2:
        raise AlistError("line 2: expected 'max_col_degree max_row_degree'")
    col_deg = ints(2, n)
    row_deg = ints(3, m)
    if any(d < 0 or d > maxs[0] for d in col_deg):
        raise AlistError("line 3: column degree outside [0, max]")
    if any(d < 0 or d > maxs[1] for d in row_deg):
        raise AlistError("line 4: row degree outside [0, max]")

    col_lists: list[list[int]] = []
    for c in range(n):
        lineno = 4 + c
        vals = [v for v in ints(lineno) if v != 0]
        if len(vals) != col_deg[c]:
            raise AlistError(
                f"line {lineno + 1}: column {c} declares degree {col_deg[c]} "
                f"but lists {len(vals)} entries"
            )
        if any(v < 1 or v > m for v in vals):
            raise AlistError(f"line {lineno + 1}: row index out of range 1..{m}")
        col_lists.append([v - 1 for v in vals])

    rows: list[list[int]] = [[] for _ in range(m)]
    for r in range(m):
        lineno = 4 + n + r
        vals = [v for v in ints(lineno) if v != 0]
        if len(vals) != row_deg[r]:
            raise AlistError(
                f"line {lineno + 1}: row {r} declares degree {row_deg[r]} "
                f"but lists {len(vals)} entries"
            )
        if any(v < 1 or v > n for v in vals):
            raise AlistError(f"line {lineno + 1}: column index out of range 1..{n}")
        rows[r] = [v - 1 for v in vals]

    h = SparseBinaryMatrix.from_entries(m, n, rows)
    # cross-check the column section against the row section
    col_ptr, col_idx = h.col_adjacency()
    for c in range(n):
        seen = sorted(int(r) for r in col_idx[col_ptr[c] : col_ptr[c + 1]])
        if seen != sorted(col_lists[c]):
            raise AlistError(
                f"line {4 + c + 1}: column {c} entries disagree with row section"
            )
    return h


def load_alist(path) -> SparseBinaryMatrix:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise AlistError(f"cannot read {path}: {exc}") from exc
    return loads_alist(text)


# ---------------------------------------------------------------------------
# elimination, rank, systematization


def _packed_from_sparse(h: SparseBinaryMatrix) -> np.ndarray:
    """Rows packed into uint64 words for fast XOR elimination."""
    nw = (h.cols + 63) // 64
    a = np.zeros((h.rows, nw), dtype=np.uint64)
    for r in range(h.rows):
        cs = h.row(r)
        np.bitwise_or.at(a[r], cs // 64, np.uint64(1) << (cs % 64).astype(np.uint64))
    return a


def _eliminate(a: np.ndarray, ncols: int, col_order) -> tuple[list[int], list[int], np.ndarray]:
    """In-place Gauss-Jordan over GF(2) on packed rows.

    Returns (pivot_cols in elimination order, pivot_rows aligned with them,
    the reduced array). Scans columns in ``col_order``, choosing the first
    unused row with a one in the column and clearing the column elsewhere.
    """
    m = a.shape[0]
    used = np.zeros(m, dtype=bool)
    piv_cols: list[int] = []
    piv_rows: list[int] = []
    for c in col_order:
        w, b = divmod(int(c), 64)
        mask = np.uint64(1) << np.uint64(b)
        hit = np.flatnonzero(((a[:, w] & mask) != 0) & ~used)
        if hit.size == 0:
            continue
        pr = int(hit[0])
        used[pr] = True
        others = np.flatnonzero((a[:, w] & mask) != 0)
        others = others[others != pr]
        if others.size:
            a[others] ^= a[pr]
        piv_cols.append(int(c))
        piv_rows.append(pr)
        if len(piv_cols) == m:
            break
    return piv_cols, piv_rows, a


def rank_gf2(h: SparseBinaryMatrix) -> int:
    a = _packed_from_sparse(h)
    piv_cols, _, _ = _eliminate(a, h.cols, range(h.cols))
    return len(piv_cols)


@dataclass(frozen=True)
class GeneratorMatrix:
    """Systematic generator: message/parity column maps plus the dense block.

    ``parity_block`` is (K x M) uint8; codeword[msg_positions] = m and
    codeword[parity_positions] = m @ parity_block (mod 2). The recorded
    column split is the permutation produced by systematization.
    """

    n: int
    k: int
    msg_positions: np.ndarray  # int32, len K, ascending
    parity_positions: np.ndarray  # int32, len M=N-K, ascending
    parity_block: np.ndarray  # uint8 (K, M)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __eq__(self, other):
        if not isinstance(other, GeneratorMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and self.k == other.k
            and np.array_equal(self.msg_positions, other.msg_positions)
            and np.array_equal(self.parity_positions, other.parity_positions)
            and np.array_equal(self.parity_block, other.parity_block)
        )

    def __hash__(self):
        return hash((self.n, self.k, self.parity_block.tobytes()))

    def _packed_parity(self) -> np.ndarray:
        if "pp" not in self._cache:
            self._cache["pp"] = np.packbits(self.parity_block, axis=1)
        return self._cache["pp"]

    def rank(self) -> int:
        return self.k  # identity on msg positions forces full rank


def systematize(
    h: SparseBinaryMatrix, allow_rank_deficient: bool = False
) -> tuple[GeneratorMatrix, np.ndarray]:
    """Gauss-Jordan systematization of H.

    Pivot columns are chosen scanning right-to-left so parity lands in the
    rightmost independent columns (information bits stay leftmost, matching
    the construction convention). Returns (G, permutation) where the
    permutation lists message positions then parity positions.

    Raises RankDeficientError when H has dependent rows, unless
    ``allow_rank_deficient`` in which case dependent rows are dropped.
    """
    m, n = h.rows, h.cols
    a = _packed_from_sparse(h)
    piv_cols, piv_rows, a = _eliminate(a, n, range(n - 1, -1, -1))
    rank = len(piv_cols)
    if rank < m and not allow_rank_deficient:
        dependent = sorted(set(range(m)) - set(piv_rows))
        raise RankDeficientError(rank, dependent)
    k = n - rank
    pivset = np.zeros(n, dtype=bool)
    pivset[piv_cols] = True
    msg_pos = np.flatnonzero(~pivset).astype(np.int32)
    par_pos = np.array(sorted(piv_cols), dtype=np.int32)

    # read the reduced rows: row with pivot at column p gives
    # c[p] = sum over message columns j with a one in that row
    col_of_piv = {p: i for i, p in enumerate(par_pos)}
    block = np.zeros((k, rank), dtype=np.uint8)
    msg_index = {int(c): i for i, c in enumerate(msg_pos)}
    for pc, pr in zip(piv_cols, piv_rows):
        pcol = col_of_piv[pc]
        row_words = a[pr]
        ones = _unpack_indices(row_words, n)
        for c in ones:
            if c == pc:
                continue
            j = msg_index.get(int(c))
            if j is None:
                raise AssertionError("reduced row touches a non-pivot column map")
            block[j, pcol] = 1
    g = GeneratorMatrix(n=n, k=k, msg_positions=msg_pos,
                        parity_positions=par_pos, parity_block=block)
    perm = np.concatenate([msg_pos, par_pos]).astype(np.int32)
    return g, perm


def _unpack_indices(words: np.ndarray, n: int) -> np.ndarray:
    le = words.astype("<u8", copy=False)
    bits = np.unpackbits(le.view(np.uint8), bitorder="little")[:n]
    return np.flatnonzero(bits)


def encode(g: GeneratorMatrix, m: np.ndarray) -> np.ndarray:
    """Systematic encode; returns the length-N codeword (uint8)."""
    m = np.asarray(m, dtype=np.uint8)
    if m.shape != (g.k,):
        raise ValueError(f"message length {m.shape} != K={g.k}")
    c = np.zeros(g.n, dtype=np.uint8)
    c[g.msg_positions] = m
    if g.parity_positions.size:
        sel = g._packed_parity()[m.astype(bool)]
        if sel.shape[0]:
            packed = np.bitwise_xor.reduce(sel, axis=0)
            par = np.unpackbits(packed)[: g.parity_positions.size]
        else:
            par = np.zeros(g.parity_positions.size, dtype=np.uint8)
        c[g.parity_positions] = par
    return c


def syndrome(h: SparseBinaryMatrix, c: np.ndarray) -> np.ndarray:
    return h.multiply_vector(c)


def gh_product_is_zero(g: GeneratorMatrix, h: SparseBinaryMatrix) -> bool:
    """Bitwise check of G . H^T = 0 via the K unit-message codewords."""
    for i in range(g.k):
        m = np.zeros(g.k, dtype=np.uint8)
        m[i] = 1
        if syndrome(h, encode(g, m)).any():
            return False
    return True


# ---------------------------------------------------------------------------
# generator persistence


def save_generator(g: GeneratorMatrix, path) -> None:
    mm = g.n - g.k
    with open(path, "wb") as f:
        f.write(GEN_MAGIC)
        f.write(np.array([GEN_VERSION, g.n, g.k, mm], dtype="<u4").tobytes())
        f.write(g.msg_positions.astype("<i4").tobytes())
        f.write(g.parity_positions.astype("<i4").tobytes())
        f.write(np.packbits(g.parity_block, axis=1).tobytes())


def load_generator(path) -> GeneratorMatrix:
    raw = Path(path).read_bytes()
    if raw[:4] != GEN_MAGIC:
        raise ValueError(f"{path}: bad magic, not a generator file")
    ver, n, k, mm = np.frombuffer(raw[4:20], dtype="<u4")
    if ver != GEN_VERSION:
        raise ValueError(f"{path}: unsupported generator version {ver}")
    off = 20
    msg = np.frombuffer(raw[off : off + 4 * k], dtype="<i4").astype(np.int32)
    off += 4 * k
    par = np.frombuffer(raw[off : off + 4 * mm], dtype="<i4").astype(np.int32)
    off += 4 * mm
    wbytes = (mm + 7) // 8
    packed = np.frombuffer(raw[off : off + k * wbytes], dtype=np.uint8)
    block = np.unpackbits(packed.reshape(k, wbytes), axis=1)[:, :mm].astype(np.uint8)
    return GeneratorMatrix(n=int(n), k=int(k), msg_positions=msg,
                           parity_positions=par, parity_block=block)


def code_rate(n: int, k: int) -> Fraction:
    return Fraction(k, n)
