# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled lane for the integer kernels.

Same Bareiss elimination and pivoting as pure.py.  Runs in int64 when a
conservative Hadamard-style bound certifies that no intermediate value
can overflow; otherwise delegates to the arbitrary-precision pure lane,
so results agree with pure.py on every input.
"""

from libc.stdint cimport int64_t
from libc.stdlib cimport free, malloc

from . import pure as _pure


cdef object _int64_safe(object mat, Py_ssize_t nrows, Py_ssize_t ncols):
    cdef object maxabs = 0
    cdef object x, ax
    for row in mat:
        for x in row:
            ax = -x if x < 0 else x
            if ax > maxabs:
                maxabs = ax
    if maxabs == 0:
        return True
    nmin = nrows if nrows < ncols else ncols
    cur = 1
    for s in range(1, nmin + 1):
        cur = cur * s * maxabs
    # cross products of consecutive-level minors appear before the exact
    # division step; stay well inside int64
    return 2 * cur * cur < (1 << 62)


def rank_int(mat):
    """Rank over Q of an integer matrix; see pure.rank_int."""
    cdef Py_ssize_t nrows = len(mat)
    cdef Py_ssize_t ncols = len(mat[0]) if nrows else 0
    if nrows == 0 or ncols == 0:
        return 0
    if not _int64_safe(mat, nrows, ncols):
        return _pure.rank_int(mat)

    cdef int64_t *m = <int64_t *> malloc(nrows * ncols * sizeof(int64_t))
    if m == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, j, col, pivot, rank
    cdef int64_t p, h, prev, tmp
    try:
        for i in range(nrows):
            row = mat[i]
            for j in range(ncols):
                m[i * ncols + j] = row[j]
        rank = 0
        prev = 1
        for col in range(ncols):
            pivot = -1
            for i in range(rank, nrows):
                if m[i * ncols + col] != 0:
                    pivot = i
                    break
            if pivot < 0:
                continue
            if pivot != rank:
                for j in range(ncols):
                    tmp = m[rank * ncols + j]
                    m[rank * ncols + j] = m[pivot * ncols + j]
                    m[pivot * ncols + j] = tmp
            p = m[rank * ncols + col]
            for i in range(rank + 1, nrows):
                h = m[i * ncols + col]
                if h == 0 and p == prev:
                    continue
                for j in range(col + 1, ncols):
                    m[i * ncols + j] = (p * m[i * ncols + j] - h * m[rank * ncols + j]) / prev
                m[i * ncols + col] = 0
            prev = p
            rank += 1
            if rank == nrows:
                break
        return rank
    finally:
        free(m)


def det_int(mat):
    """Determinant of a square integer matrix; see pure.det_int."""
    cdef Py_ssize_t n = len(mat)
    if n == 0:
        return 1
    for row in mat:
        if len(row) != n:
            raise ValueError("det_int requires a square matrix")
    if not _int64_safe(mat, n, n):
        return _pure.det_int(mat)

    cdef int64_t *m = <int64_t *> malloc(n * n * sizeof(int64_t))
    if m == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, j, col, pivot
    cdef int64_t p, h, prev, tmp, sign
    try:
        for i in range(n):
            row = mat[i]
            for j in range(n):
                m[i * n + j] = row[j]
        sign = 1
        prev = 1
        for col in range(n - 1):
            pivot = -1
            for i in range(col, n):
                if m[i * n + col] != 0:
                    pivot = i
                    break
            if pivot < 0:
                return 0
            if pivot != col:
                for j in range(n):
                    tmp = m[col * n + j]
                    m[col * n + j] = m[pivot * n + j]
                    m[pivot * n + j] = tmp
                sign = -sign
            p = m[col * n + col]
            for i in range(col + 1, n):
                h = m[i * n + col]
                for j in range(col + 1, n):
                    m[i * n + j] = (p * m[i * n + j] - h * m[col * n + j]) / prev
                m[i * n + col] = 0
            prev = p
        return sign * m[n * n - 1]
    finally:
        free(m)
