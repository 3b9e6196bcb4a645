"""Kernel matrices, centering, alignment, CKA and HSIC.

All reductions (row sums, Frobenius inner products) use exact, correctly
rounded summation, so every quantity here is bit-stable under simultaneous
permutation of the samples and independent of parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backends
from .errors import (
    DegenerateKernel,
    DimMismatch,
    InvalidBandwidth,
    NonFiniteInput,
)

PROVENANCES = ("pretrained", "random", "raw", "synthetic")
KERNEL_KINDS = ("linear", "gaussian", "laplacian")


@dataclass
class FeatureMatrix:
    """n x d matrix of real-valued feature activations.

    ``provenance`` records where the rows came from: a pretrained model,
    an untrained random network, the raw input representation, or a
    synthetic generator.
    """

    data: np.ndarray
    provenance: str = "pretrained"

    def __post_init__(self) -> None:
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise DimMismatch(f"feature matrix must be 2-D, got shape {self.data.shape}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise DimMismatch(f"feature matrix needs n >= 1 and d >= 1, got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise NonFiniteInput("feature matrix contains non-finite entries")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass
class LabelVector:
    """Integer class ids in [0, num_classes)."""

    labels: np.ndarray
    num_classes: int

    def __post_init__(self) -> None:
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1:
            raise DimMismatch("labels must be 1-D")
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        if self.labels.size < 1:
            raise DimMismatch("labels must be non-empty")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise ValueError("label ids must lie in [0, num_classes)")

    @property
    def n(self) -> int:
        return self.labels.size

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> "LabelVector":
        labels = np.asarray(labels, dtype=np.int64)
        return cls(labels=labels, num_classes=int(labels.max()) + 1 if labels.size else 1)


@dataclass
class KernelMatrix:
    """n x n symmetric similarity matrix.

    ``centered`` marks whether the double-centering projector has been
    applied; ``kernel_kind`` records the generating kernel.  Construction
    symmetrizes via (K + K^T)/2 to kill float asymmetry, since downstream
    traces assume exact symmetry.
    """

    data: np.ndarray
    centered: bool = False
    kernel_kind: str = "linear"
    sigma: float | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
            raise DimMismatch(f"kernel matrix must be square, got shape {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise NonFiniteInput("kernel matrix contains non-finite entries")
        scale = np.abs(self.data).max()
        if scale > 0 and np.abs(self.data - self.data.T).max() > 1e-9 * scale:
            raise ValueError("kernel matrix is not symmetric within tolerance")
        self.data = (self.data + self.data.T) / 2.0

    @property
    def n(self) -> int:
        return self.data.shape[0]


def _median_offdiag(dist: np.ndarray) -> float:
    """Median of the strict upper triangle; 1.0 when degenerate."""
    n = dist.shape[0]
    iu = np.triu_indices(n, k=1)
    if iu[0].size == 0:
        return 1.0
    med = float(np.median(dist[iu]))
    return med if med > 0.0 else 1.0


def median_bandwidth(features: FeatureMatrix, metric: str = "euclidean") -> float:
    """Median of pairwise distances between rows (the median heuristic).

    Falls back to 1.0 when the median is zero (more than half the pairs
    coincide), so the kernel stays well defined on duplicated rows.
    """
    if metric == "euclidean":
        d = np.sqrt(backends.pairwise_sq_dists(features.data))
    elif metric == "l1":
        d = backends.pairwise_l1_dists(features.data)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    return _median_offdiag(d)


def compute_kernel(
    features: FeatureMatrix,
    kind: str = "linear",
    sigma: float | None = None,
    unsquared_gaussian: bool = False,
) -> KernelMatrix:
    """Uncentered kernel matrix of the rows of ``features``.

    kinds:
      linear     K[i,j] = <f_i, f_j>
      gaussian   K[i,j] = exp(-||f_i - f_j||^2 / (2 sigma^2))
      laplacian  K[i,j] = exp(-||f_i - f_j||_1 / sigma)

    ``sigma`` defaults to the median heuristic on the given rows.  With
    ``unsquared_gaussian`` the exponent uses the plain Euclidean norm
    instead of its square (a nonstandard radial variant kept behind this
    flag; see the package docs for when you would want it).
    """
    if kind not in KERNEL_KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}")
    if sigma is not None and (not (sigma > 0.0) or not math.isfinite(sigma)):
        raise InvalidBandwidth(f"sigma must be positive and finite, got {sigma}")
    x = features.data
    if kind == "linear":
        k = backends.linear_gram(x)
        return KernelMatrix(k, centered=False, kernel_kind="linear")

    if kind == "gaussian":
        d2 = backends.pairwise_sq_dists(x)
        if sigma is None:
            sigma = _median_offdiag(np.sqrt(d2))
        if unsquared_gaussian:
            k = np.exp(-np.sqrt(d2) / (2.0 * sigma * sigma))
        else:
            k = np.exp(-d2 / (2.0 * sigma * sigma))
    else:
        d1 = backends.pairwise_l1_dists(x)
        if sigma is None:
            sigma = _median_offdiag(d1)
        k = np.exp(-d1 / sigma)
    np.fill_diagonal(k, 1.0)
    return KernelMatrix(k, centered=False, kernel_kind=kind, sigma=float(sigma))


def target_kernel(labels: LabelVector) -> KernelMatrix:
    """Ideal kernel from labels: 1 where classes match, else 0.

    Equals the linear kernel of the one-hot label encoding.
    """
    eq = (labels.labels[:, None] == labels.labels[None, :]).astype(np.float64)
    return KernelMatrix(eq, centered=False, kernel_kind="linear")


def center_kernel(kernel: KernelMatrix) -> KernelMatrix:
    """Apply the double-centering projector H K H with H = I - 11^T/n.

    Idempotent; a matrix already flagged centered is returned unchanged.
    Row and column means are exact sums, so centering commutes bit-for-bit
    with sample permutation.
    """
    if kernel.centered:
        return kernel
    k = kernel.data
    n = kernel.n
    row_means = backends.row_sums_exact(k) / n
    grand_mean = backends.sum_exact(row_means) / n
    centered = k - row_means[:, None] - row_means[None, :] + grand_mean
    centered = (centered + centered.T) / 2.0
    return KernelMatrix(centered, centered=True, kernel_kind=kernel.kernel_kind, sigma=kernel.sigma)


def _frobenius_products(k1: np.ndarray, k2: np.ndarray) -> tuple[float, float, float]:
    a = k1.ravel()
    b = k2.ravel()
    return (
        backends.dot_exact(a, b),
        backends.dot_exact(a, a),
        backends.dot_exact(b, b),
    )


def alignment(kernel1: KernelMatrix, kernel2: KernelMatrix) -> float:
    """Cosine of the two kernel matrices under the Frobenius inner product."""
    if kernel1.n != kernel2.n:
        raise DimMismatch(f"kernel sizes differ: {kernel1.n} vs {kernel2.n}")
    n12, n11, n22 = _frobenius_products(kernel1.data, kernel2.data)
    if n11 <= 0.0 or n22 <= 0.0:
        raise DegenerateKernel("kernel matrix has zero Frobenius norm")
    value = n12 / math.sqrt(n11 * n22)
    return min(1.0, max(-1.0, value))


def cka(kernel1: KernelMatrix, kernel2: KernelMatrix) -> float:
    """Centered kernel alignment: the alignment of the centered matrices.

    Lies in [0, 1] for positive semidefinite inputs.  Raises
    DegenerateKernel when a matrix centers to zero, which means constant
    features (all samples identical) or constant labels; that is a data
    bug the caller must see, not a score of 0.
    """
    if kernel1.n != kernel2.n:
        raise DimMismatch(f"kernel sizes differ: {kernel1.n} vs {kernel2.n}")
    if kernel1.n < 2:
        raise DimMismatch("cka needs at least 2 samples")
    return alignment(center_kernel(kernel1), center_kernel(kernel2))


def hsic(kernel: KernelMatrix, other: KernelMatrix) -> float:
    """Empirical HSIC: Tr(K H L H) / (n-1)^2 with H the centering projector.

    Computed as the Frobenius product of the two centered matrices, which
    is the same quantity (H is idempotent) and keeps hsic(K, K) >= 0.
    """
    if kernel.n != other.n:
        raise DimMismatch(f"kernel sizes differ: {kernel.n} vs {other.n}")
    n = kernel.n
    if n < 2:
        raise DimMismatch("hsic needs at least 2 samples")
    kc = center_kernel(kernel)
    lc = center_kernel(other)
    num = backends.dot_exact(kc.data.ravel(), lc.data.ravel())
    return num / float((n - 1) ** 2)
