"""NumPy fallback for the hot GF(2) kernels.

Same contracts as the compiled ``usteen._gf2c`` module.  A matrix is a
``uint64`` array of shape ``(nrows, nwords)``; rows are packed little-endian,
so column ``j`` lives in word ``j >> 6``, bit ``j & 63``.
"""

from __future__ import annotations

import numpy as np

_ONE = np.uint64(1)


def unpack_bits(words: np.ndarray, ncols: int) -> np.ndarray:
    """Expand packed rows into a (nrows, ncols) uint8 matrix of 0/1."""
    nrows = words.shape[0]
    if ncols == 0 or nrows == 0:
        return np.zeros((nrows, ncols), dtype=np.uint8)
    as_bytes = np.ascontiguousarray(words).view(np.uint8).reshape(nrows, -1)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    return bits[:, :ncols]


def pack_bits(bits: np.ndarray, ncols: int) -> np.ndarray:
    """Pack a (nrows, ncols) 0/1 matrix into little-endian uint64 words."""
    nrows = bits.shape[0]
    nwords = (ncols + 63) >> 6
    if nrows == 0 or nwords == 0:
        return np.zeros((nrows, nwords), dtype=np.uint64)
    pad = nwords * 64 - ncols
    if pad:
        bits = np.concatenate(
            [bits, np.zeros((nrows, pad), dtype=bits.dtype)], axis=1
        )
    packed = np.packbits(bits.astype(np.uint8), axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64)


def rref_inplace(work: np.ndarray, nrows: int, ncols: int, npivot_cols: int) -> list:
    """Reduce ``work`` to reduced row-echelon form in place.

    Pivots are searched in the first ``npivot_cols`` columns only; row
    operations still apply to the full packed width (augmented solves rely
    on this).  Returns the list of pivot columns.
    """
    pivots: list = []
    pr = 0
    for col in range(npivot_cols):
        if pr == nrows:
            break
        w = col >> 6
        b = np.uint64(col & 63)
        colbits = (work[pr:nrows, w] >> b) & _ONE
        nz = np.nonzero(colbits)[0]
        if nz.size == 0:
            continue
        p = pr + int(nz[0])
        if p != pr:
            work[[pr, p]] = work[[p, pr]]
        sel = ((work[:nrows, w] >> b) & _ONE).astype(bool)
        sel[pr] = False
        if sel.any():
            work[sel] ^= work[pr]
        pivots.append(col)
        pr += 1
    return pivots


def mat_mult(a: np.ndarray, a_rows: int, a_cols: int, b: np.ndarray, b_cols: int, out: np.ndarray) -> None:
    """GF(2) matrix product: ``out = a @ b``.  ``out`` must be zeroed.

    Goes through a float product (exact: entries are bounded by the inner
    dimension, far below 2**53) so the BLAS path applies, then reduces mod 2.
    """
    if a_rows == 0 or a_cols == 0 or b_cols == 0:
        return
    lhs = unpack_bits(a[:a_rows], a_cols).astype(np.float64)
    rhs = unpack_bits(b[:a_cols], b_cols).astype(np.float64)
    prod = np.rint(lhs @ rhs).astype(np.int64) & 1
    out[:, :] = pack_bits(prod.astype(np.uint8), b_cols)
