# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled GF(2) kernels: word-parallel Gaussian elimination and matmul.

Matrices are uint64 arrays of shape (nrows, nwords), rows packed
little-endian (column j = word j >> 6, bit j & 63).  Contracts match the
NumPy fallback in ``usteen._gf2py``.
"""

from libc.stdint cimport uint64_t


def rref_inplace(uint64_t[:, ::1] work, Py_ssize_t nrows, Py_ssize_t ncols,
                 Py_ssize_t npivot_cols):
    """Full reduced row-echelon form in place; returns pivot column list."""
    cdef Py_ssize_t nwords = work.shape[1]
    cdef Py_ssize_t pr = 0
    cdef Py_ssize_t col, w, r, p, k
    cdef uint64_t mask, tmp
    pivots = []
    for col in range(npivot_cols):
        if pr == nrows:
            break
        w = col >> 6
        mask = (<uint64_t> 1) << (col & 63)
        p = -1
        for r in range(pr, nrows):
            if work[r, w] & mask:
                p = r
                break
        if p < 0:
            continue
        if p != pr:
            for k in range(w, nwords):
                tmp = work[pr, k]
                work[pr, k] = work[p, k]
                work[p, k] = tmp
        for r in range(nrows):
            if r != pr and (work[r, w] & mask):
                # row pr is zero left of its pivot, so start the XOR there
                for k in range(w, nwords):
                    work[r, k] ^= work[pr, k]
        pivots.append(col)
        pr += 1
    return pivots


def mat_mult(const uint64_t[:, ::1] a, Py_ssize_t a_rows, Py_ssize_t a_cols,
             const uint64_t[:, ::1] b, Py_ssize_t b_cols, uint64_t[:, ::1] out):
    """GF(2) matrix product: out = a @ b.  ``out`` must be zeroed."""
    cdef Py_ssize_t bwords = out.shape[1]
    cdef Py_ssize_t i, k, w
    cdef uint64_t mask
    if a_rows == 0 or a_cols == 0 or b_cols == 0:
        return
    for i in range(a_rows):
        for k in range(a_cols):
            mask = (<uint64_t> 1) << (k & 63)
            if a[i, k >> 6] & mask:
                for w in range(bwords):
                    out[i, w] ^= b[k, w]
