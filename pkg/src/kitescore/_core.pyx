# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: pairwise distances, Gram matrices, exact reductions.

The ``*_exact`` reductions return the correctly rounded sum (Shewchuk
partials, same algorithm as ``math.fsum``), so results are independent of
element order.  That property is what makes alignment scores bit-stable
under sample permutation and thread count.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, sqrt

cnp.import_array()

# Nonoverlapping partials for doubles are bounded by ~40; 128 leaves margin.
DEF MAX_PARTIALS = 128


cdef inline Py_ssize_t _partials_add(double x, double *p, Py_ssize_t n) except -1 nogil:
    """Fold x into the partials array; returns the new partial count."""
    cdef Py_ssize_t i = 0, j
    cdef double y, hi, lo, yr
    for j in range(n):
        y = p[j]
        if fabs(x) < fabs(y):
            hi = x
            x = y
            y = hi
        hi = x + y
        yr = hi - x
        lo = y - yr
        if lo != 0.0:
            p[i] = lo
            i += 1
        x = hi
    if i >= MAX_PARTIALS:
        with gil:
            raise OverflowError("partials buffer exhausted in exact sum")
    p[i] = x
    return i + 1


cdef inline double _partials_round(double *p, Py_ssize_t n) nogil:
    """Correctly rounded value of the partials (CPython fsum tail)."""
    cdef double hi = 0.0, lo = 0.0, x, y, yr
    if n > 0:
        n -= 1
        hi = p[n]
        while n > 0:
            x = hi
            n -= 1
            y = p[n]
            hi = x + y
            yr = hi - x
            lo = y - yr
            if lo != 0.0:
                break
        # round-half-even correction against the next partial down
        if n > 0 and ((lo < 0.0 and p[n - 1] < 0.0) or (lo > 0.0 and p[n - 1] > 0.0)):
            y = lo * 2.0
            x = hi + y
            yr = x - hi
            if y == yr:
                hi = x
    return hi


def sum_exact(double[::1] a):
    """Correctly rounded sum of a 1-D float64 array (order-invariant)."""
    cdef double p[MAX_PARTIALS]
    cdef Py_ssize_t n = 0, i
    cdef double x
    for i in range(a.shape[0]):
        x = a[i]
        if not isfinite(x):
            raise ValueError("non-finite value in exact sum")
        n = _partials_add(x, p, n)
    return _partials_round(p, n)


def dot_exact(double[::1] a, double[::1] b):
    """Correctly rounded sum of elementwise products a[i]*b[i]."""
    cdef double p[MAX_PARTIALS]
    cdef Py_ssize_t n = 0, i
    cdef double x
    if a.shape[0] != b.shape[0]:
        raise ValueError("length mismatch in exact dot")
    for i in range(a.shape[0]):
        x = a[i] * b[i]
        if not isfinite(x):
            raise ValueError("non-finite value in exact dot")
        n = _partials_add(x, p, n)
    return _partials_round(p, n)


def row_sums_exact(double[:, ::1] k):
    """Correctly rounded sum of every row of a 2-D float64 array."""
    cdef Py_ssize_t nrows = k.shape[0], ncols = k.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(nrows, dtype=np.float64)
    cdef double p[MAX_PARTIALS]
    cdef Py_ssize_t n, i, j
    cdef double x
    for i in range(nrows):
        n = 0
        for j in range(ncols):
            x = k[i, j]
            if not isfinite(x):
                raise ValueError("non-finite value in exact row sum")
            n = _partials_add(x, p, n)
        out[i] = _partials_round(p, n)
    return out


def pairwise_sq_dists(double[:, ::1] x):
    """Dense matrix of squared Euclidean distances between rows of x."""
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, n), dtype=np.float64)
    cdef Py_ssize_t i, j, k
    cdef double s, diff
    for i in range(n):
        out[i, i] = 0.0
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                s += diff * diff
            out[i, j] = s
            out[j, i] = s
    return out


def pairwise_l1_dists(double[:, ::1] x):
    """Dense matrix of L1 (Manhattan) distances between rows of x."""
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, n), dtype=np.float64)
    cdef Py_ssize_t i, j, k
    cdef double s
    for i in range(n):
        out[i, i] = 0.0
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                s += fabs(x[i, k] - x[j, k])
            out[i, j] = s
            out[j, i] = s
    return out


def linear_gram(double[:, ::1] x):
    """Gram matrix of row dot products <x_i, x_j>."""
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, n), dtype=np.float64)
    cdef Py_ssize_t i, j, k
    cdef double s
    for i in range(n):
        for j in range(i, n):
            s = 0.0
            for k in range(d):
                s += x[i, k] * x[j, k]
            out[i, j] = s
            out[j, i] = s
    return out
