"""Exact linear algebra over the two-element field.

Matrices are dense and bit-packed, 64 columns per word, so every row
operation is a word-parallel XOR.  Values are immutable after construction
and all operations are pure functions, safe to share across threads.

The elimination and product inner loops come from the compiled extension
``usteen._gf2c`` when it was built; otherwise the NumPy fallback
``usteen._gf2py`` is selected at import.  Set ``USTEEN_PURE_GF2=1`` to force
the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ._gf2py import pack_bits, unpack_bits

if os.environ.get("USTEEN_PURE_GF2", "0") not in ("", "0"):
    from . import _gf2py as _kernel

    KERNEL_NAME = "python"
else:
    try:
        from . import _gf2c as _kernel  # type: ignore[no-redef]

        KERNEL_NAME = "compiled"
    except ImportError:
        from . import _gf2py as _kernel  # type: ignore[no-redef]

        KERNEL_NAME = "python"


def _nwords(ncols: int) -> int:
    return (ncols + 63) >> 6


class BitMatrix:
    """An immutable GF(2) matrix with bit-packed rows."""

    __slots__ = ("nrows", "ncols", "_w")

    def __init__(self, nrows: int, ncols: int, words: np.ndarray):
        if nrows < 0 or ncols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        if words.shape != (nrows, _nwords(ncols)):
            raise ValueError("word array shape mismatch")
        words = np.ascontiguousarray(words, dtype=np.uint64)
        words.setflags(write=False)
        self.nrows = nrows
        self.ncols = ncols
        self._w = words

    # -- constructors -----------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls(nrows, ncols, np.zeros((nrows, _nwords(ncols)), dtype=np.uint64))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_row_ints((1 << j for j in range(n)), n, nrows=n)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], ncols: Optional[int] = None) -> "BitMatrix":
        rows = [list(r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        bits = np.array(rows, dtype=np.uint8).reshape(len(rows), ncols)
        if np.any(bits > 1):
            raise ValueError("entries must be 0 or 1")
        return cls(len(rows), ncols, pack_bits(bits, ncols))

    @classmethod
    def from_row_ints(cls, rows: Iterable[int], ncols: int, nrows: Optional[int] = None) -> "BitMatrix":
        rows = list(rows)
        if nrows is not None and len(rows) != nrows:
            raise ValueError("row count mismatch")
        nw = _nwords(ncols)
        words = np.zeros((len(rows), nw), dtype=np.uint64)
        limit = 1 << ncols
        for i, r in enumerate(rows):
            if r < 0 or r >= limit:
                raise ValueError(f"row {i} out of range for {ncols} columns")
            if r:
                buf = r.to_bytes(nw * 8, "little")
                words[i] = np.frombuffer(buf, dtype=np.uint64)
        return cls(len(rows), ncols, words)

    # -- access ------------------------------------------------------------

    def get(self, i: int, j: int) -> int:
        """Entry (i, j); out-of-range access is an error, never a silent 0."""
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(f"entry ({i}, {j}) outside {self.nrows}x{self.ncols}")
        return int((self._w[i, j >> 6] >> np.uint64(j & 63)) & np.uint64(1))

    def row_int(self, i: int) -> int:
        if not 0 <= i < self.nrows:
            raise IndexError("row index out of range")
        return int.from_bytes(self._w[i].tobytes(), "little")

    def row_ints(self) -> list:
        return [self.row_int(i) for i in range(self.nrows)]

    def to_lists(self) -> list:
        return unpack_bits(self._w, self.ncols).tolist()

    def words(self) -> np.ndarray:
        """Read-only view of the packed words (kernel interop)."""
        return self._w

    def is_zero(self) -> bool:
        return not self._w.any()

    # -- structure ---------------------------------------------------------

    def transpose(self) -> "BitMatrix":
        bits = unpack_bits(self._w, self.ncols).T
        return BitMatrix(self.ncols, self.nrows, pack_bits(np.ascontiguousarray(bits), self.nrows))

    def take_rows(self, indices: Sequence[int]) -> "BitMatrix":
        idx = list(indices)
        return BitMatrix(len(idx), self.ncols, self._w[idx].copy() if idx else
                         np.zeros((0, _nwords(self.ncols)), dtype=np.uint64))

    def take_cols(self, indices: Sequence[int]) -> "BitMatrix":
        idx = list(indices)
        bits = unpack_bits(self._w, self.ncols)[:, idx]
        return BitMatrix(self.nrows, len(idx), pack_bits(np.ascontiguousarray(bits), len(idx)))

    def concat_cols(self, other: "BitMatrix") -> "BitMatrix":
        if self.nrows != other.nrows:
            raise ValueError("row count mismatch")
        bits = np.concatenate(
            [unpack_bits(self._w, self.ncols), unpack_bits(other._w, other.ncols)], axis=1
        )
        return BitMatrix(self.nrows, self.ncols + other.ncols, pack_bits(bits, self.ncols + other.ncols))

    def stack(self, other: "BitMatrix") -> "BitMatrix":
        if self.ncols != other.ncols:
            raise ValueError("column count mismatch")
        return BitMatrix(self.nrows + other.nrows, self.ncols, np.vstack([self._w, other._w]))

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")
        return BitMatrix(self.nrows, self.ncols, self._w ^ other._w)

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"cannot multiply {self.nrows}x{self.ncols} by {other.nrows}x{other.ncols}")
        out = np.zeros((self.nrows, _nwords(other.ncols)), dtype=np.uint64)
        _kernel.mat_mult(self._w, self.nrows, self.ncols, other._w, other.ncols, out)
        return BitMatrix(self.nrows, other.ncols, out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return (self.nrows, self.ncols) == (other.nrows, other.ncols) and np.array_equal(self._w, other._w)

    def __hash__(self) -> int:
        return hash((self.nrows, self.ncols, self._w.tobytes()))

    def __repr__(self) -> str:
        if self.nrows * self.ncols <= 256:
            body = ";".join("".join(str(b) for b in row) for row in self.to_lists())
            return f"BitMatrix({self.nrows}x{self.ncols}:[{body}])"
        return f"BitMatrix({self.nrows}x{self.ncols})"


@dataclass(frozen=True)
class RrefResult:
    matrix: BitMatrix
    rank: int
    pivots: tuple


def rref(m: BitMatrix) -> RrefResult:
    """Canonical reduced row-echelon form (row-equivalent to ``m``)."""
    work = m._w.copy()
    pivots = _kernel.rref_inplace(work, m.nrows, m.ncols, m.ncols)
    return RrefResult(BitMatrix(m.nrows, m.ncols, work), len(pivots), tuple(pivots))


def rank(m: BitMatrix) -> int:
    work = m._w.copy()
    return len(_kernel.rref_inplace(work, m.nrows, m.ncols, m.ncols))


def kernel_basis(m: BitMatrix) -> "Subspace":
    """The subspace {v : m @ v = 0}, of dimension cols - rank."""
    res = rref(m)
    piv = list(res.pivots)
    pivset = set(piv)
    red = res.matrix
    rows = []
    for f in range(m.ncols):
        if f in pivset:
            continue
        v = 1 << f
        for idx, p in enumerate(piv):
            if red.get(idx, f):
                v |= 1 << p
        rows.append(v)
    return Subspace.from_rows(BitMatrix.from_row_ints(rows, m.ncols))


def left_kernel(m: BitMatrix) -> "Subspace":
    """The subspace {x : x @ m = 0} (row relations of ``m``)."""
    return kernel_basis(m.transpose())


def solve(m: BitMatrix, target: Sequence[int]) -> Optional[tuple]:
    """One solution of ``m @ x = target``, or None when inconsistent.

    Deterministic tie-break: free variables are set to 0.  An empty solution
    (zero unknowns) is the empty tuple, distinct from None.
    """
    tgt = list(target)
    if len(tgt) != m.nrows:
        raise ValueError("target length must equal row count")
    col = BitMatrix.from_rows([[b] for b in tgt], 1)
    sols = solve_many(m, col)
    if sols is None:
        return None
    return tuple(sols.get(i, 0) for i in range(m.ncols))


def solve_many(m: BitMatrix, targets: BitMatrix) -> Optional[BitMatrix]:
    """Solve ``m @ X = targets`` column-wise; None if any column fails.

    ``targets`` has one column per system.  Free variables are 0.
    """
    if targets.nrows != m.nrows:
        raise ValueError("target row count mismatch")
    aug = m.concat_cols(targets)
    work = aug._w.copy()
    pivots = _kernel.rref_inplace(work, aug.nrows, aug.ncols, m.ncols)
    red = BitMatrix(aug.nrows, aug.ncols, work)
    nzrows = len(pivots)
    # any nonzero row beyond the pivot rows witnesses inconsistency
    for i in range(nzrows, aug.nrows):
        for w in red._w[i]:
            if w:
                return None
    out = np.zeros((m.ncols, _nwords(targets.ncols)), dtype=np.uint64)
    for idx, p in enumerate(pivots):
        for j in range(targets.ncols):
            if red.get(idx, m.ncols + j):
                out[p, j >> 6] |= np.uint64(1) << np.uint64(j & 63)
    return BitMatrix(m.ncols, targets.ncols, out)


def express_in_rowspace(basis: BitMatrix, vecs: BitMatrix) -> Optional[BitMatrix]:
    """Coefficients C with C @ basis = vecs, or None if some row escapes."""
    if basis.ncols != vecs.ncols:
        raise ValueError("ambient width mismatch")
    sols = solve_many(basis.transpose(), vecs.transpose())
    if sols is None:
        return None
    return sols.transpose()


class Subspace:
    """A subspace of GF(2)^n held as a canonical rref basis.

    Canonical form means equality of subspaces is row-wise equality of the
    basis matrices.
    """

    __slots__ = ("ambient_dim", "basis")

    def __init__(self, ambient_dim: int, basis: BitMatrix):
        if basis.ncols != ambient_dim:
            raise ValueError("basis width must match ambient dimension")
        pivots = []
        for i in range(basis.nrows):
            r = basis.row_int(i)
            if r == 0:
                raise ValueError("canonical basis may not contain zero rows")
            pivots.append((r & -r).bit_length() - 1)
        if any(b <= a for a, b in zip(pivots, pivots[1:])):
            raise ValueError("pivot columns must strictly increase")
        self.ambient_dim = ambient_dim
        self.basis = basis

    @classmethod
    def from_rows(cls, rows: BitMatrix) -> "Subspace":
        res = rref(rows)
        return cls(rows.ncols, res.matrix.take_rows(range(res.rank)))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, BitMatrix.zeros(0, ambient_dim))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, BitMatrix.identity(ambient_dim))

    @property
    def dim(self) -> int:
        return self.basis.nrows

    def contains_vector(self, v: int) -> bool:
        """Membership of an int-packed vector, by elimination against the basis."""
        for i in range(self.basis.nrows):
            r = self.basis.row_int(i)
            p = (r & -r).bit_length() - 1
            if (v >> p) & 1:
                v ^= r
        return v == 0

    def contains(self, other: "Subspace") -> bool:
        self._check_ambient(other)
        return all(self.contains_vector(other.basis.row_int(i)) for i in range(other.dim))

    def sum(self, other: "Subspace") -> "Subspace":
        self._check_ambient(other)
        return Subspace.from_rows(self.basis.stack(other.basis))

    def intersect(self, other: "Subspace") -> "Subspace":
        """Intersection via the kernel of the stacked annihilator system."""
        self._check_ambient(other)
        ann_self = kernel_basis(self.basis).basis
        ann_other = kernel_basis(other.basis).basis
        return kernel_basis(ann_self.stack(ann_other))

    def _check_ambient(self, other: "Subspace") -> None:
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient dimension mismatch")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(dim {self.dim} of F2^{self.ambient_dim})"
