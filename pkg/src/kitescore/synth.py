"""Synthetic data and model zoos for desk-scale trend experiments.

A zoo model with quality q maps the raw inputs to
``q * discriminative_embedding + (1 - q) * random_linear_projection``.
The discriminative embedding places each sample at its class's one-hot
centroid, scaled to the separation of the raw class means, plus small
jitter; that ties the best model's separability to the intrinsic task
difficulty (on a task whose classes nearly coincide, even the q=1 model
stays weakly separable).  Ground-truth transfer accuracy is 1-NN
leave-one-out accuracy on a held-out split.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatch
from .estimators import score_knn_cv
from .kernels import FeatureMatrix, LabelVector
from .random_features import derive_seed, _rng

JITTER_VARIANCE = 0.01
IDENTITY_SCALE = 1.0
IDENTITY_GROUP_SIZE = 4


@dataclass
class GaussianMixtureSpec:
    """Isotropic Gaussian mixture: one mean per class, shared variance."""

    means: np.ndarray  # num_classes x d
    n_per_class: int
    variance: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        self.means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        if self.variance <= 0:
            raise ValueError("variance must be positive")
        if self.n_per_class < 1:
            raise ValueError("n_per_class must be >= 1")

    @property
    def num_classes(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


def two_class_spec(
    separation: float, n_per_class: int, dim: int = 2, variance: float = 1.0, seed: int = 0
) -> GaussianMixtureSpec:
    """Two classes at distance ``separation`` along the first axis."""
    means = np.zeros((2, dim))
    means[0, 0] = -separation / 2.0
    means[1, 0] = +separation / 2.0
    return GaussianMixtureSpec(means, n_per_class, variance, seed)


def orthogonal_spec(
    num_classes: int,
    separation: float,
    n_per_class: int,
    dim: int | None = None,
    variance: float = 1.0,
    seed: int = 0,
) -> GaussianMixtureSpec:
    """Class means on orthogonal axes, every pair exactly ``separation`` apart."""
    if dim is None:
        dim = num_classes
    if dim < num_classes:
        raise DimMismatch("orthogonal placement needs dim >= num_classes")
    means = np.zeros((num_classes, dim))
    for c in range(num_classes):
        means[c, c] = separation / np.sqrt(2.0)
    return GaussianMixtureSpec(means, n_per_class, variance, seed)


def gen_gaussian_mixture(spec: GaussianMixtureSpec) -> tuple[FeatureMatrix, LabelVector]:
    """Draw n_per_class samples around each class mean, class-blocked order."""
    rng = _rng(derive_seed("gaussian-mixture", spec.seed))
    std = np.sqrt(spec.variance)
    blocks = [
        spec.means[c] + std * rng.standard_normal((spec.n_per_class, spec.dim))
        for c in range(spec.num_classes)
    ]
    data = np.vstack(blocks)
    labels = np.repeat(np.arange(spec.num_classes), spec.n_per_class)
    return (
        FeatureMatrix(data, provenance="synthetic"),
        LabelVector(labels, num_classes=spec.num_classes),
    )


def gen_hard_task(
    num_classes: int = 20,
    separation: float = 0.3,
    n_per_class: int = 30,
    seed: int = 0,
) -> tuple[FeatureMatrix, LabelVector]:
    """Fine-grained analogue: many classes, small mean separation."""
    return gen_gaussian_mixture(orthogonal_spec(num_classes, separation, n_per_class, seed=seed))


def gen_easy_task(
    num_classes: int = 8,
    separation: float = 4.0,
    n_per_class: int = 75,
    dim: int = 32,
    seed: int = 0,
) -> tuple[FeatureMatrix, LabelVector]:
    """Coarse-grained analogue: few well-separated classes."""
    return gen_gaussian_mixture(
        orthogonal_spec(num_classes, separation, n_per_class, dim=dim, seed=seed)
    )


@dataclass
class SyntheticZooSpec:
    """Zoo of feature maps spanning a grid of quality levels q in [0, 1]."""

    raw_dim: int
    num_models: int = 8
    quality_grid: list[float] = field(default_factory=list)
    seed: int = 0
    holdout_fraction: float = 0.5
    geometry_fade: float = 0.7

    def __post_init__(self) -> None:
        if not self.quality_grid:
            self.quality_grid = [float(q) for q in np.linspace(0.0, 1.0, self.num_models)]
        self.quality_grid = [float(q) for q in self.quality_grid]
        if len(set(self.quality_grid)) != len(self.quality_grid):
            raise ValueError("quality grid values must be distinct")
        if any(q < 0.0 or q > 1.0 for q in self.quality_grid):
            raise ValueError("quality grid values must lie in [0, 1]")
        self.num_models = len(self.quality_grid)
        if not (0.0 < self.holdout_fraction < 1.0):
            raise ValueError("holdout_fraction must lie in (0, 1)")
        if not (0.0 < self.geometry_fade <= 1.0):
            raise ValueError("geometry_fade must lie in (0, 1]")


@dataclass
class ZooModel:
    model_id: str
    quality: float
    features: FeatureMatrix  # scoring-split rows only
    ground_truth_accuracy: float


def zoo_split(n: int, seed: int, holdout_fraction: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic (scoring, holdout) index split used by the zoo."""
    rng = _rng(derive_seed("zoo-split", seed))
    perm = rng.permutation(n)
    n_holdout = max(int(round(n * holdout_fraction)), 1)
    holdout = np.sort(perm[:n_holdout])
    scoring = np.sort(perm[n_holdout:])
    return scoring, holdout


def _unit_scale(m: np.ndarray) -> np.ndarray:
    """Rescale to unit mean per-dimension variance (no-op on constants)."""
    v = float(m.var(axis=0).mean())
    return m / np.sqrt(v) if v > 0.0 else m


def _mean_class_separation(raw: np.ndarray, labels: np.ndarray, num_classes: int) -> float:
    """Noise-corrected mean distance between class means.

    Empirical centroids of small classes are dominated by sampling noise
    (E||m_a - m_b||^2 inflates by sigma^2 d (1/n_a + 1/n_b)); subtracting
    that term keeps the embedding scale tied to the true separation, which
    is what makes intrinsically hard tasks stay hard for every zoo model.
    """
    d = raw.shape[1]
    counts = np.bincount(labels, minlength=num_classes)
    centroids = np.vstack([raw[labels == c].mean(axis=0) for c in range(num_classes)])
    within = [
        raw[labels == c].var(axis=0, ddof=1).mean() for c in range(num_classes) if counts[c] >= 2
    ]
    noise_var = float(np.mean(within)) if within else 0.0
    seps = []
    for a in range(num_classes):
        for b in range(a + 1, num_classes):
            raw_sq = float(np.sum((centroids[a] - centroids[b]) ** 2))
            bias = noise_var * d * (1.0 / counts[a] + 1.0 / counts[b])
            seps.append(np.sqrt(max(raw_sq - bias, 0.0)))
    return float(np.mean(seps)) if seps else 0.0


def _identity_groups(
    y: np.ndarray, num_classes: int, seed: int
) -> tuple[np.ndarray, int]:
    """Assign samples to small same-class identity groups.

    Mimics near-duplicate individuals inside a class (the fine-grained
    regime): a good embedding clusters group members tightly even when the
    classes themselves barely separate.  Local neighbors see this; global
    class-block alignment largely does not.
    """
    rng = _rng(derive_seed("zoo-groups", seed))
    groups = np.empty(y.size, dtype=np.int64)
    next_group = 0
    for c in range(num_classes):
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(idx.size)]
        for start in range(0, idx.size, IDENTITY_GROUP_SIZE):
            members = idx[start : start + IDENTITY_GROUP_SIZE]
            groups[members] = next_group
            next_group += 1
    return groups, next_group


def gen_synthetic_zoo(
    spec: SyntheticZooSpec, data: tuple[FeatureMatrix, LabelVector]
) -> list[ZooModel]:
    """Generate the zoo's feature maps and their ground-truth accuracies.

    A model with quality q embeds class centroids, identity-group offsets
    and jitter, mixed against a random linear projection of the raw input;
    only the mixing coefficient is dialed across the zoo.  Returned
    features cover the scoring split; the accuracy comes from 1-NN
    leave-one-out on the held-out split.
    """
    raw, labels = data
    if raw.d != spec.raw_dim:
        raise DimMismatch(f"data dim {raw.d} != spec raw_dim {spec.raw_dim}")
    n = raw.n
    num_classes = labels.num_classes
    y = labels.labels

    scale = _mean_class_separation(raw.data, y, num_classes) / 2.0
    one_hot = np.eye(num_classes)[y]
    groups, num_groups = _identity_groups(y, num_classes, spec.seed)

    scoring, holdout = zoo_split(n, spec.seed, spec.holdout_fraction)
    holdout_labels = LabelVector(y[holdout], num_classes)

    models: list[ZooModel] = []
    for i, q in enumerate(spec.quality_grid):
        # every model draws its own jitter, identity directions and
        # projection, like distinct architectures in a real zoo; only the
        # mixing coefficient is dialed
        embed_rng = _rng(derive_seed("zoo-embed", spec.seed, i))
        jitter = np.sqrt(JITTER_VARIANCE) * embed_rng.standard_normal((n, num_classes))
        group_dirs = embed_rng.standard_normal((num_groups, num_classes)) / np.sqrt(num_classes)
        disc = _unit_scale(scale * one_hot + IDENTITY_SCALE * group_dirs[groups] + jitter)
        proj_rng = _rng(derive_seed("zoo-proj", spec.seed, i))
        projection = proj_rng.standard_normal((raw.d, num_classes)) / np.sqrt(raw.d)
        projected = _unit_scale(raw.data @ projection)
        feats = q * disc + (1.0 - spec.geometry_fade * q) * projected
        gt = score_knn_cv(
            FeatureMatrix(feats[holdout], provenance="pretrained"), holdout_labels, k=1
        )
        models.append(
            ZooModel(
                model_id=f"model_{i:02d}",
                quality=q,
                features=FeatureMatrix(feats[scoring], provenance="pretrained"),
                ground_truth_accuracy=gt,
            )
        )
    return models
