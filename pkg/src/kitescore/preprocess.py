"""Feature preprocessing: PCA reduction and stratified probe sampling."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ClassTooSmall, DimMismatch, ProbeCappedWarning, RankDeficientWarning
from .kernels import FeatureMatrix, LabelVector
from .random_features import derive_seed, _rng


@dataclass
class ProbeSet:
    """Paired features and labels sampled from a target dataset."""

    features: FeatureMatrix
    labels: LabelVector
    source_seed: int
    indices: np.ndarray | None = None  # rows of the pool the probe came from

    def __post_init__(self) -> None:
        if self.features.n != self.labels.n:
            raise DimMismatch("probe features and labels disagree on n")
        counts = np.bincount(self.labels.labels, minlength=self.labels.num_classes)
        if counts.min() < 2:
            raise ClassTooSmall("every class in a probe set needs >= 2 samples")


@dataclass
class PcaModel:
    """Mean vector plus orthonormal component rows, variance-ordered."""

    mean: np.ndarray
    components: np.ndarray  # k x d, rows orthonormal
    explained_variance: np.ndarray  # length k, non-increasing

    @property
    def k(self) -> int:
        return self.components.shape[0]


def pca_fit(features: FeatureMatrix, k: int) -> PcaModel:
    """Fit PCA by SVD of the mean-centered data.

    Deterministic sign convention: within each component the entry of
    largest magnitude is made positive, so components are bit-stable
    across runs.  If k exceeds the numerical rank, the model is truncated
    to the rank with a RankDeficientWarning rather than failing.
    """
    x = features.data
    n, d = x.shape
    if not (1 <= k <= min(n - 1, d)):
        raise DimMismatch(f"need 1 <= k <= min(n-1, d) = {min(n - 1, d)}, got k={k}")
    mean = x.mean(axis=0)
    centered = x - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    tol = s[0] * max(n, d) * np.finfo(np.float64).eps if s.size else 0.0
    rank = int(np.sum(s > tol))
    if k > rank:
        warnings.warn(
            f"requested {k} components but numerical rank is {rank}; truncating",
            RankDeficientWarning,
        )
        k = max(rank, 1)
    components = vt[:k]
    # sign convention: largest-|entry| coordinate of each component positive
    pivot = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(k), pivot])
    signs[signs == 0] = 1.0
    components = components * signs[:, None]
    explained = (s[:k] ** 2) / (n - 1)
    return PcaModel(mean=mean, components=components, explained_variance=explained)


def pca_transform(model: PcaModel, features: FeatureMatrix) -> FeatureMatrix:
    """Project features onto the fitted components: (X - mean) @ C^T."""
    if features.d != model.components.shape[1]:
        raise DimMismatch(
            f"features have d={features.d}, model expects d={model.components.shape[1]}"
        )
    z = (features.data - model.mean) @ model.components.T
    return FeatureMatrix(z, provenance=features.provenance)


def reduce_features(features: FeatureMatrix, k: int | None) -> FeatureMatrix:
    """Fit-and-transform convenience used by the scoring pipeline.

    ``k`` of None (or anything >= min(n-1, d)) leaves the features alone.
    """
    if k is None:
        return features
    cap = min(features.n - 1, features.d)
    if k >= cap:
        return features
    model = pca_fit(features, k)
    return pca_transform(model, features)


def _proportional_counts(pool_counts: np.ndarray, budget: int) -> np.ndarray:
    """Largest-remainder split of ``budget`` proportional to pool counts,
    capped at the per-class availability (pool_counts - 2 already spent)."""
    avail = pool_counts - 2
    total = pool_counts.sum()
    take = np.zeros_like(pool_counts)
    remaining = budget
    active = avail > 0
    while remaining > 0 and active.any():
        weight = np.where(active, pool_counts, 0)
        quota = remaining * weight / max(weight.sum(), 1)
        base = np.minimum(np.floor(quota).astype(np.int64), avail - take)
        base = np.where(active, base, 0)
        take += base
        remaining -= int(base.sum())
        if remaining <= 0:
            break
        # distribute the leftover by largest remainder, one per class
        frac = np.where(active & (take < avail), quota - np.floor(quota), -1.0)
        order = np.argsort(-frac, kind="stable")
        progressed = False
        for c in order:
            if remaining == 0:
                break
            if frac[c] < 0:
                continue
            take[c] += 1
            remaining -= 1
            progressed = True
        active = (take < avail) & (avail > 0)
        if not progressed:
            break
    return take


def sample_probe(
    features: FeatureMatrix,
    labels: LabelVector,
    target_size: int = 500,
    seed: int = 0,
) -> ProbeSet:
    """Stratified probe draw: 2 guaranteed per class, proportional fill.

    The probe is capped at the pool size (with a warning) instead of
    erroring on small datasets.  Deterministic for a given seed.
    """
    if features.n != labels.n:
        raise DimMismatch("features and labels disagree on n")
    y = labels.labels
    counts = np.bincount(y, minlength=labels.num_classes)
    if counts.min() < 2:
        short = int(np.argmin(counts))
        raise ClassTooSmall(
            f"class {short} has {counts[short]} samples in the pool; need >= 2"
        )
    num_classes = labels.num_classes
    cap = min(target_size, features.n)
    if cap < target_size:
        warnings.warn(
            f"probe target {target_size} exceeds pool size {features.n}; capped",
            ProbeCappedWarning,
        )
    if cap < 2 * num_classes:
        warnings.warn(
            f"target size {target_size} cannot hold 2 samples for each of "
            f"{num_classes} classes; probe grows to {2 * num_classes}",
            ProbeCappedWarning,
        )
    budget = max(cap - 2 * num_classes, 0)
    extra = _proportional_counts(counts, budget)
    per_class = 2 + extra

    rng = _rng(derive_seed("probe-sample", seed))
    chosen: list[np.ndarray] = []
    for c in range(num_classes):
        idx = np.flatnonzero(y == c)
        chosen.append(rng.choice(idx, size=int(per_class[c]), replace=False))
    indices = np.sort(np.concatenate(chosen))
    probe_features = FeatureMatrix(features.data[indices], provenance=features.provenance)
    probe_labels = LabelVector(y[indices], num_classes)
    return ProbeSet(probe_features, probe_labels, source_seed=seed, indices=indices)
