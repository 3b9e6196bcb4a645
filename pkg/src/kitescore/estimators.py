"""Transferability estimators behind one pluggable interface.

Every estimator consumes a ScoreRequest and returns one real number; the
registry maps estimator names to implementations so new baselines can be
added without touching the callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import backends
from .errors import (
    DegenerateRA,
    DimMismatch,
    TooFewSamples,
    UnknownEstimator,
)
from .kernels import (
    FeatureMatrix,
    LabelVector,
    cka,
    compute_kernel,
    hsic,
    target_kernel,
)

RA_FLOOR = 1e-12


@dataclass
class ModelMeta:
    """Architecture metadata used by the depth-plus-data heuristic."""

    layers: int
    source_size: int
    target_size: int

    def __post_init__(self) -> None:
        if self.layers <= 0 or self.source_size <= 0 or self.target_size <= 0:
            raise ValueError("ModelMeta fields must be positive")


@dataclass
class ScoreRequest:
    """Inputs for one scoring call.

    ``random`` may be None for estimators that do not compare against an
    untrained network; ``labels`` may be None for label-free estimators.
    """

    pretrained: FeatureMatrix
    labels: LabelVector | None = None
    random: FeatureMatrix | None = None
    kernel_kind: str = "linear"
    sigma: float | None = None
    estimator: str = "kite"
    lambda_: float = 1.0
    k: int = 1
    meta: ModelMeta | None = None

    def __post_init__(self) -> None:
        if self.labels is not None and self.labels.n != self.pretrained.n:
            raise DimMismatch(
                f"labels ({self.labels.n}) and features ({self.pretrained.n}) disagree on n"
            )
        if self.random is not None and self.random.n != self.pretrained.n:
            raise DimMismatch(
                f"random features ({self.random.n}) and features ({self.pretrained.n}) disagree on n"
            )


def score_ta(
    pretrained: FeatureMatrix,
    labels: LabelVector,
    kernel_kind: str = "linear",
    sigma: float | None = None,
) -> float:
    """Target alignment: CKA between the feature kernel and the label kernel.

    Captures class separability of the features.
    """
    ks = compute_kernel(pretrained, kernel_kind, sigma)
    ky = target_kernel(labels)
    return cka(ks, ky)


def score_ra(
    pretrained: FeatureMatrix,
    random: FeatureMatrix,
    kernel_kind: str = "linear",
    sigma: float | None = None,
) -> float:
    """Random alignment: CKA between the feature kernel and the kernel of
    an untrained network's features on the same samples."""
    ks = compute_kernel(pretrained, kernel_kind, sigma)
    kr = compute_kernel(random, kernel_kind, sigma)
    return cka(ks, kr)


def score_kite(request: ScoreRequest) -> float:
    """Ratio of target alignment to random alignment.

    High when the features separate the classes and look nothing like an
    untrained network's features.  An RA below 1e-12 means the inputs are
    broken (at realistic n the alignment of two non-degenerate kernels is
    bounded well away from zero), so that is an error, not a huge score.
    """
    if request.labels is None:
        raise DimMismatch("kite needs labels")
    if request.random is None:
        raise DimMismatch("kite needs random features")
    ta = score_ta(request.pretrained, request.labels, request.kernel_kind, request.sigma)
    ra = score_ra(request.pretrained, request.random, request.kernel_kind, request.sigma)
    if ra < RA_FLOOR:
        raise DegenerateRA(f"random alignment {ra!r} below {RA_FLOOR} floor")
    return ta / ra


def score_linear_combo(request: ScoreRequest, lambda_: float | None = None) -> float:
    """TA - lambda * RA, the additive alternative to the ratio."""
    if request.labels is None:
        raise DimMismatch("linear_combo needs labels")
    if request.random is None:
        raise DimMismatch("linear_combo needs random features")
    lam = request.lambda_ if lambda_ is None else lambda_
    ta = score_ta(request.pretrained, request.labels, request.kernel_kind, request.sigma)
    ra = score_ra(request.pretrained, request.random, request.kernel_kind, request.sigma)
    return ta - lam * ra


def score_heuristic(meta: ModelMeta) -> float:
    """Depth plus log total data: layers + ln(source_size + target_size)."""
    return meta.layers + math.log(meta.source_size + meta.target_size)


def score_knn_cv(pretrained: FeatureMatrix, labels: LabelVector, k: int = 1) -> float:
    """Leave-one-out k-NN accuracy on the features under Euclidean distance.

    Deterministic tie rules: equidistant neighbors are taken in sample
    order; vote ties go to the smallest class id.
    """
    n = pretrained.n
    if labels.n != n:
        raise DimMismatch("labels and features disagree on n")
    if k < 1:
        raise ValueError("k must be >= 1")
    if n <= k:
        raise TooFewSamples(f"need n > k, got n={n}, k={k}")
    d2 = backends.pairwise_sq_dists(pretrained.data)
    np.fill_diagonal(d2, np.inf)
    y = labels.labels
    correct = 0
    for i in range(n):
        order = np.argsort(d2[i], kind="stable")[:k]
        votes = np.bincount(y[order], minlength=labels.num_classes)
        pred = int(np.argmax(votes))  # argmax returns the smallest id on ties
        correct += int(pred == y[i])
    return correct / n


def score_hsic_alt(
    pretrained: FeatureMatrix,
    random: FeatureMatrix,
    kernel_kind: str = "linear",
    sigma: float | None = None,
) -> float:
    """Unnormalized HSIC between the feature kernel and the random kernel."""
    ks = compute_kernel(pretrained, kernel_kind, sigma)
    kr = compute_kernel(random, kernel_kind, sigma)
    return hsic(ks, kr)


def _dispatch_ta(req: ScoreRequest) -> float:
    if req.labels is None:
        raise DimMismatch("ta needs labels")
    return score_ta(req.pretrained, req.labels, req.kernel_kind, req.sigma)


def _dispatch_ra(req: ScoreRequest) -> float:
    if req.random is None:
        raise DimMismatch("ra needs random features")
    return score_ra(req.pretrained, req.random, req.kernel_kind, req.sigma)


def _dispatch_hsic(req: ScoreRequest) -> float:
    if req.random is None:
        raise DimMismatch("hsic_score needs random features")
    return score_hsic_alt(req.pretrained, req.random, req.kernel_kind, req.sigma)


def _dispatch_heuristic(req: ScoreRequest) -> float:
    if req.meta is None:
        raise DimMismatch("heuristic needs model metadata (layers, source size)")
    return score_heuristic(req.meta)


def _dispatch_knn(req: ScoreRequest) -> float:
    if req.labels is None:
        raise DimMismatch("knn_cv needs labels")
    return score_knn_cv(req.pretrained, req.labels, req.k)


ESTIMATORS: dict[str, Callable[[ScoreRequest], float]] = {
    "kite": score_kite,
    "ta": _dispatch_ta,
    "ra": _dispatch_ra,
    "linear_combo": score_linear_combo,
    "hsic_score": _dispatch_hsic,
    "heuristic": _dispatch_heuristic,
    "knn_cv": _dispatch_knn,
}

# which optional inputs each estimator needs (used for CLI validation)
NEEDS_RANDOM = {"kite", "ra", "linear_combo", "hsic_score"}
NEEDS_LABELS = {"kite", "ta", "linear_combo", "knn_cv"}
NEEDS_META = {"heuristic"}


def compute_score(request: ScoreRequest) -> float:
    """Dispatch a ScoreRequest to its estimator by name."""
    try:
        fn = ESTIMATORS[request.estimator]
    except KeyError:
        raise UnknownEstimator(
            f"unknown estimator {request.estimator!r}; known: {sorted(ESTIMATORS)}"
        ) from None
    return fn(request)
