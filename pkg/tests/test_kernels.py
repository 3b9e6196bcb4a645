"""Kernel construction, centering, alignment, CKA and HSIC against
independent brute-force oracles."""

import math

import numpy as np
import pytest

from conftest import random_psd
from kitescore.errors import DegenerateKernel, InvalidBandwidth, NonFiniteInput
from kitescore.kernels import (
    FeatureMatrix,
    KernelMatrix,
    LabelVector,
    alignment,
    center_kernel,
    cka,
    compute_kernel,
    hsic,
    median_bandwidth,
    target_kernel,
)

# ------------------------------------------------------------- oracles


def kernel_oracle(x, kind, sigma=1.0):
    """O(n^2 d) double-loop kernel construction."""
    n = x.shape[0]
    k = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            if kind == "linear":
                k[i, j] = sum(x[i, t] * x[j, t] for t in range(x.shape[1]))
            elif kind == "gaussian":
                k[i, j] = math.exp(-sum((x[i, t] - x[j, t]) ** 2 for t in range(x.shape[1])) / (2 * sigma**2))
            elif kind == "laplacian":
                k[i, j] = math.exp(-sum(abs(x[i, t] - x[j, t]) for t in range(x.shape[1])) / sigma)
    return k


def center_oracle(k):
    """Explicit H K H triple product."""
    n = k.shape[0]
    h = np.eye(n) - np.ones((n, n)) / n
    return h @ k @ h


def alignment_oracle(k1, k2):
    """Element-wise Frobenius ratio."""
    num = float(np.sum(k1 * k2))
    return num / math.sqrt(float(np.sum(k1 * k1)) * float(np.sum(k2 * k2)))


def hsic_oracle(k, el):
    """Naive four-matrix trace product."""
    n = k.shape[0]
    h = np.eye(n) - np.ones((n, n)) / n
    return float(np.trace(k @ h @ el @ h)) / (n - 1) ** 2


def cka_oracle(k, el):
    """Normalized-HSIC identity."""
    return hsic_oracle(k, el) / math.sqrt(hsic_oracle(k, k) * hsic_oracle(el, el))


# ------------------------------------------------------- compute_kernel


def test_linear_kernel_on_identity_rows():
    k = compute_kernel(FeatureMatrix(np.eye(2), "synthetic"), "linear")
    assert np.array_equal(k.data, np.eye(2))


def test_gaussian_kernel_identical_rows_all_ones():
    f = FeatureMatrix(np.ones((5, 3)), "synthetic")
    for sigma in (0.5, 1.0, 7.0):
        k = compute_kernel(f, "gaussian", sigma=sigma)
        assert np.array_equal(k.data, np.ones((5, 5)))


def test_linear_kernel_matches_double_loop_oracle(rng):
    x = rng.standard_normal((8, 3))
    k = compute_kernel(FeatureMatrix(x, "synthetic"), "linear")
    assert np.abs(k.data - kernel_oracle(x, "linear")).max() < 1e-12


@pytest.mark.parametrize("kind", ["linear", "gaussian", "laplacian"])
def test_all_kernels_match_oracle(kind, rng):
    for _ in range(20):
        n, d = int(rng.integers(2, 17)), int(rng.integers(1, 9))
        x = rng.standard_normal((n, d))
        sigma = float(rng.uniform(0.5, 3.0))
        k = compute_kernel(FeatureMatrix(x, "synthetic"), kind, sigma=sigma)
        assert np.abs(k.data - kernel_oracle(x, kind, sigma)).max() < 1e-12


def test_unsquared_gaussian_variant(rng):
    x = rng.standard_normal((6, 3))
    sigma = 1.3
    k = compute_kernel(FeatureMatrix(x, "synthetic"), "gaussian", sigma=sigma, unsquared_gaussian=True)
    for i in range(6):
        for j in range(6):
            want = math.exp(-np.linalg.norm(x[i] - x[j]) / (2 * sigma**2))
            assert k.data[i, j] == pytest.approx(want, abs=1e-12)


def test_gaussian_laplacian_unit_diagonal(rng):
    x = rng.standard_normal((10, 4))
    for kind in ("gaussian", "laplacian"):
        k = compute_kernel(FeatureMatrix(x, "synthetic"), kind)
        assert np.array_equal(np.diag(k.data), np.ones(10))


def test_invalid_bandwidth_rejected(rng):
    f = FeatureMatrix(rng.standard_normal((4, 2)), "synthetic")
    for bad in (0.0, -1.0, float("nan")):
        with pytest.raises(InvalidBandwidth):
            compute_kernel(f, "gaussian", sigma=bad)


def test_non_finite_features_rejected():
    with pytest.raises(NonFiniteInput):
        FeatureMatrix(np.array([[1.0, np.nan]]), "synthetic")


def test_median_bandwidth_heuristic(rng):
    x = rng.standard_normal((9, 3))
    f = FeatureMatrix(x, "synthetic")
    d = [np.linalg.norm(x[i] - x[j]) for i in range(9) for j in range(i + 1, 9)]
    assert median_bandwidth(f) == pytest.approx(np.median(d), abs=1e-12)
    # degenerate: identical rows fall back to 1.0
    assert median_bandwidth(FeatureMatrix(np.ones((4, 2)), "synthetic")) == 1.0


# ------------------------------------------------------- target_kernel


def test_target_kernel_block_pattern():
    ky = target_kernel(LabelVector(np.array([0, 0, 1, 1]), 2))
    want = np.array([[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]], dtype=float)
    assert np.array_equal(ky.data, want)


def test_target_kernel_degenerate_patterns():
    assert np.array_equal(target_kernel(LabelVector(np.zeros(3, dtype=int), 1)).data, np.ones((3, 3)))
    assert np.array_equal(target_kernel(LabelVector(np.arange(4), 4)).data, np.eye(4))


# ------------------------------------------------------- center_kernel


def test_center_all_ones_is_zero():
    kc = center_kernel(KernelMatrix(np.ones((6, 6))))
    assert np.array_equal(kc.data, np.zeros((6, 6)))
    assert kc.centered


def test_centering_idempotent(rng):
    k = KernelMatrix(random_psd(rng, 7))
    once = center_kernel(k)
    again = center_kernel(KernelMatrix(once.data))  # flag dropped on purpose
    assert np.abs(once.data - again.data).max() < 1e-12


def test_center_matches_triple_product_oracle(rng):
    a = rng.standard_normal((6, 6))
    k = KernelMatrix((a + a.T) / 2)
    assert np.abs(center_kernel(k).data - center_oracle(k.data)).max() < 1e-12


def test_centered_rows_sum_to_zero(rng):
    k = KernelMatrix(random_psd(rng, 20))
    kc = center_kernel(k)
    bound = 1e-8 * np.linalg.norm(k.data)
    assert np.abs(kc.data.sum(axis=0)).max() < bound
    assert np.abs(kc.data.sum(axis=1)).max() < bound


# ------------------------------------------------------------ alignment


def test_alignment_self_is_one(rng):
    k = KernelMatrix(random_psd(rng, 5))
    assert alignment(k, k) == pytest.approx(1.0, abs=1e-12)


def test_alignment_scale_invariant(rng):
    k = KernelMatrix(random_psd(rng, 5))
    assert alignment(k, KernelMatrix(3.7 * k.data)) == pytest.approx(1.0, abs=1e-12)


def test_alignment_matches_oracle(rng):
    k1 = KernelMatrix(random_psd(rng, 5))
    k2 = KernelMatrix(random_psd(rng, 5))
    assert alignment(k1, k2) == pytest.approx(alignment_oracle(k1.data, k2.data), abs=1e-12)


def test_alignment_zero_norm_degenerate():
    z = KernelMatrix(np.zeros((3, 3)))
    k = KernelMatrix(np.eye(3))
    with pytest.raises(DegenerateKernel):
        alignment(z, k)


# ------------------------------------------------------------------ cka


def test_cka_perfectly_clustered_features_vs_labels():
    f = FeatureMatrix(np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]), "synthetic")
    ky = target_kernel(LabelVector(np.array([0, 0, 1, 1]), 2))
    assert cka(compute_kernel(f, "linear"), ky) == pytest.approx(1.0, abs=1e-12)


def test_cka_self_is_one(rng):
    k = KernelMatrix(random_psd(rng, 9))
    assert cka(k, k) == pytest.approx(1.0, abs=1e-12)


def test_cka_equals_normalized_hsic(rng):
    for _ in range(25):
        n = int(rng.integers(3, 51))
        k1, k2 = random_psd(rng, n), random_psd(rng, n)
        got = cka(KernelMatrix(k1), KernelMatrix(k2))
        assert got == pytest.approx(cka_oracle(k1, k2), abs=1e-10)
        assert 0.0 <= got <= 1.0


def test_cka_symmetric_and_permutation_invariant(rng):
    n = 12
    k1, k2 = random_psd(rng, n), random_psd(rng, n)
    a = cka(KernelMatrix(k1), KernelMatrix(k2))
    assert a == cka(KernelMatrix(k2), KernelMatrix(k1))
    perm = rng.permutation(n)
    k1p = KernelMatrix(k1[np.ix_(perm, perm)])
    k2p = KernelMatrix(k2[np.ix_(perm, perm)])
    assert cka(k1p, k2p) == a  # exact: reductions are order-invariant


def test_cka_orthogonal_and_scaling_invariance_linear(rng):
    x = rng.standard_normal((15, 6))
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    ky = target_kernel(LabelVector(rng.integers(0, 3, 15), 3))
    base = cka(compute_kernel(FeatureMatrix(x, "synthetic"), "linear"), ky)
    rotated = cka(compute_kernel(FeatureMatrix(x @ q, "synthetic"), "linear"), ky)
    scaled = cka(compute_kernel(FeatureMatrix(2.5 * x, "synthetic"), "linear"), ky)
    assert rotated == pytest.approx(base, abs=1e-9)
    assert scaled == pytest.approx(base, abs=1e-12)


def test_cka_constant_features_raise():
    f = FeatureMatrix(np.full((4, 3), 2.0), "synthetic")
    k = compute_kernel(f, "linear")
    ky = target_kernel(LabelVector(np.array([0, 1, 0, 1]), 2))
    with pytest.raises(DegenerateKernel):
        cka(k, ky)


def test_cka_constant_labels_raise(rng):
    k = compute_kernel(FeatureMatrix(rng.standard_normal((4, 2)), "synthetic"), "linear")
    ky = target_kernel(LabelVector(np.zeros(4, dtype=int), 1))
    with pytest.raises(DegenerateKernel):
        cka(k, ky)


# ----------------------------------------------------------------- hsic


def test_hsic_identity_kernels_n2():
    k = KernelMatrix(np.eye(2))
    assert hsic(k, k) == 1.0


def test_hsic_constant_second_argument_is_zero(rng):
    k = KernelMatrix(random_psd(rng, 6))
    ones = KernelMatrix(np.ones((6, 6)))
    assert hsic(k, ones) == 0.0


def test_hsic_matches_product_oracle(rng):
    k1, k2 = random_psd(rng, 10), random_psd(rng, 10)
    assert hsic(KernelMatrix(k1), KernelMatrix(k2)) == pytest.approx(hsic_oracle(k1, k2), abs=1e-10)


def test_hsic_self_nonnegative(rng):
    for n in (2, 5, 17):
        k = KernelMatrix(random_psd(rng, n))
        assert hsic(k, k) >= 0.0
