"""Pure-Python fallback for the compiled core.

Mirrors the semantics of ``kitescore._core`` exactly: the reductions use
``math.fsum`` (same correctly rounded result as the compiled Shewchuk
summation), distances use vectorized numpy.  Slower, never wrong.
"""

from __future__ import annotations

import math

import numpy as np


def _check_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite value in {what}")


def sum_exact(a: np.ndarray) -> float:
    a = np.ascontiguousarray(a, dtype=np.float64)
    _check_finite(a, "exact sum")
    return math.fsum(a)


def dot_exact(a: np.ndarray, b: np.ndarray) -> float:
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.shape[0] != b.shape[0]:
        raise ValueError("length mismatch in exact dot")
    prod = a * b
    _check_finite(prod, "exact dot")
    return math.fsum(prod)


def row_sums_exact(k: np.ndarray) -> np.ndarray:
    k = np.ascontiguousarray(k, dtype=np.float64)
    _check_finite(k, "exact row sum")
    return np.array([math.fsum(row) for row in k], dtype=np.float64)


def pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    # kill the GEMM asymmetry so both triangles agree bit-for-bit
    return (d2 + d2.T) / 2.0


def pairwise_l1_dists(x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        out[i] = np.abs(x[i] - x).sum(axis=1)
    np.fill_diagonal(out, 0.0)
    return (out + out.T) / 2.0


def linear_gram(x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    g = x @ x.T
    return (g + g.T) / 2.0
