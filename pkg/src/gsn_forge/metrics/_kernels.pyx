# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: blocked bit-parallel LCS and pairwise Kendall counts."""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int _popcount(uint64_t x) noexcept nogil:
    return __builtin_popcountll(x)


def lcs_length(str a, str b):
    """Length of the longest common subsequence of ``a`` and ``b``."""
    if len(a) < len(b):
        a, b = b, a
    cdef Py_ssize_t m = len(b)
    if m == 0:
        return 0
    cdef Py_ssize_t words = (m + 63) // 64
    rows = {}
    for ch in b:
        if ch not in rows:
            rows[ch] = len(rows)
    cdef cnp.ndarray[cnp.uint64_t, ndim=2] masks = np.zeros((len(rows) + 1, words), dtype=np.uint64)
    cdef Py_ssize_t i, w, r
    for i in range(m):
        r = rows[b[i]]
        masks[r, i >> 6] |= (<uint64_t>1) << (i & 63)
    # Row len(rows) stays zero for characters absent from b.
    cdef Py_ssize_t absent = len(rows)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] seq = np.fromiter(
        (rows.get(ch, absent) for ch in a), dtype=np.int64, count=len(a)
    )
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] v = np.full(words, 0xFFFFFFFFFFFFFFFF, dtype=np.uint64)
    cdef uint64_t[:, :] mv = masks
    cdef uint64_t[:] vv = v
    cdef long long[:] sv = seq
    cdef Py_ssize_t n = len(a)
    cdef uint64_t carry, vw, mw, u, tmp, total
    cdef int zeros = 0
    cdef int tail = m & 63
    with nogil:
        for i in range(n):
            r = sv[i]
            if r == absent:
                continue
            carry = 0
            for w in range(words):
                vw = vv[w]
                mw = mv[r, w]
                u = vw & mw
                tmp = vw + u
                total = tmp + carry
                carry = 1 if (tmp < vw or total < tmp) else 0
                vv[w] = total | (vw & ~mw)
        for w in range(words):
            vw = vv[w]
            if w == words - 1 and tail:
                vw |= ~((<uint64_t>1 << tail) - 1)
            zeros += 64 - _popcount(vw)
    return zeros


def kendall_counts(x, y):
    """``(concordant, discordant, ties_only_x, ties_only_y)`` over all pairs."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = np.asarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ya = np.asarray(y, dtype=np.float64)
    cdef double[:] xv = xa
    cdef double[:] yv = ya
    cdef Py_ssize_t n = xa.shape[0]
    cdef Py_ssize_t i, j
    cdef double dx, dy
    cdef long long conc = 0, disc = 0, tx = 0, ty = 0
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                dx = xv[i] - xv[j]
                dy = yv[i] - yv[j]
                if dx == 0 and dy == 0:
                    continue
                if dx == 0:
                    tx += 1
                elif dy == 0:
                    ty += 1
                elif (dx > 0) == (dy > 0):
                    conc += 1
                else:
                    disc += 1
    return conc, disc, tx, ty
