"""Shared scoring pipeline: PCA reduction, random-feature generation,
estimator dispatch.  Used by the CLI commands and the zoo harness."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimators import (
    NEEDS_LABELS,
    NEEDS_META,
    NEEDS_RANDOM,
    ModelMeta,
    ScoreRequest,
    compute_score,
)
from .kernels import FeatureMatrix, LabelVector
from .preprocess import reduce_features
from .random_features import (
    RandomNetSpec,
    derive_seed,
    gaussian_random_features,
    random_mlp_features,
)

RANDOM_KINDS = ("net", "gaussian")


@dataclass
class PipelineConfig:
    """Everything needed to turn raw inputs into one estimator score."""

    estimator: str = "kite"
    kernel: str = "linear"
    sigma: float | None = None
    pca_dim: int | None = 32
    lambda_: float = 1.0
    k: int = 1
    random_kind: str = "net"  # "net" or data-independent "gaussian"
    hidden_widths: list[int] = field(default_factory=lambda: [512, 256])
    init: str = "he_normal"
    num_seeds: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.random_kind not in RANDOM_KINDS:
            raise ValueError(f"random_kind must be one of {RANDOM_KINDS}")

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "kernel": self.kernel,
            "sigma": self.sigma,
            "pca_dim": self.pca_dim,
            "lambda": self.lambda_,
            "k": self.k,
            "random_kind": self.random_kind,
            "random_net": {
                "hidden_widths": list(self.hidden_widths),
                "init": self.init,
                "num_seeds": self.num_seeds,
            },
            "seed": self.seed,
        }


def make_random_features(
    raw: FeatureMatrix, output_dim: int, cfg: PipelineConfig, stream: str = "random-net"
) -> FeatureMatrix:
    """Random features matching ``output_dim``: an untrained network on the
    raw representation by default, or the data-independent standard-normal
    baseline."""
    if cfg.random_kind == "gaussian":
        return gaussian_random_features(raw.n, output_dim, seed=derive_seed(stream, cfg.seed))
    spec = RandomNetSpec(
        input_dim=raw.d,
        output_dim=output_dim,
        hidden_widths=list(cfg.hidden_widths),
        init=cfg.init,
        num_seeds=cfg.num_seeds,
        base_seed=derive_seed(stream, cfg.seed),
    )
    return random_mlp_features(raw, spec)


def score_model(
    model_features: FeatureMatrix,
    labels: LabelVector | None,
    raw: FeatureMatrix | None,
    cfg: PipelineConfig,
    *,
    random_features: FeatureMatrix | None = None,
    meta: ModelMeta | None = None,
    random_stream: str = "random-net",
) -> float:
    """Run the full scoring pipeline for one model.

    Random features are generated from ``raw`` when the estimator needs
    them and none are supplied; both feature sets are PCA-reduced
    independently to ``cfg.pca_dim`` before any kernel is built.
    """
    if cfg.estimator in NEEDS_RANDOM and random_features is None:
        if raw is None:
            raise ValueError(f"estimator {cfg.estimator!r} needs raw features or --random")
        random_features = make_random_features(raw, model_features.d, cfg, random_stream)
    reduced = reduce_features(model_features, cfg.pca_dim)
    reduced_random = (
        reduce_features(random_features, cfg.pca_dim)
        if (cfg.estimator in NEEDS_RANDOM and random_features is not None)
        else None
    )
    if cfg.estimator in NEEDS_META and meta is None:
        raise ValueError("heuristic estimator needs model metadata")
    request = ScoreRequest(
        pretrained=reduced,
        labels=labels if cfg.estimator in NEEDS_LABELS else None,
        random=reduced_random,
        kernel_kind=cfg.kernel,
        sigma=cfg.sigma,
        estimator=cfg.estimator,
        lambda_=cfg.lambda_,
        k=cfg.k,
        meta=meta,
    )
    return compute_score(request)
