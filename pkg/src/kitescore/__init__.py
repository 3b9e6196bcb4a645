"""Kernel-alignment transferability scoring.

Scores how well a pretrained feature extractor will transfer to a target
dataset by comparing its feature kernel against the label kernel (target
alignment), against an untrained network's feature kernel (random
alignment), and by their ratio.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .backends import backend_name
from .estimators import (
    ESTIMATORS,
    ModelMeta,
    ScoreRequest,
    compute_score,
    score_heuristic,
    score_hsic_alt,
    score_kite,
    score_knn_cv,
    score_linear_combo,
    score_ra,
    score_ta,
)
from .evaluation import (
    EvalReport,
    ScoreTable,
    kernel_value_histogram,
    pearson,
    ta_ra_correlation,
    te_aggregate,
    weighted_kendall_tau,
)
from .io_formats import (
    ModelManifest,
    load_manifest,
    load_score_table,
    read_features,
    write_features,
)
from .kernels import (
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
from .pipeline import PipelineConfig, score_model
from .preprocess import PcaModel, ProbeSet, pca_fit, pca_transform, sample_probe
from .random_features import (
    RandomNetSpec,
    gaussian_random_features,
    init_weights,
    random_mlp_features,
)
from .synth import (
    GaussianMixtureSpec,
    SyntheticZooSpec,
    gen_easy_task,
    gen_gaussian_mixture,
    gen_hard_task,
    gen_synthetic_zoo,
)

__all__ = [
    "__version__",
    "backend_name",
    # kernels
    "FeatureMatrix",
    "KernelMatrix",
    "LabelVector",
    "alignment",
    "center_kernel",
    "cka",
    "compute_kernel",
    "hsic",
    "median_bandwidth",
    "target_kernel",
    # estimators
    "ESTIMATORS",
    "ModelMeta",
    "ScoreRequest",
    "compute_score",
    "score_heuristic",
    "score_hsic_alt",
    "score_kite",
    "score_knn_cv",
    "score_linear_combo",
    "score_ra",
    "score_ta",
    # random features
    "RandomNetSpec",
    "gaussian_random_features",
    "init_weights",
    "random_mlp_features",
    # preprocessing
    "PcaModel",
    "ProbeSet",
    "pca_fit",
    "pca_transform",
    "sample_probe",
    # evaluation
    "EvalReport",
    "ScoreTable",
    "kernel_value_histogram",
    "pearson",
    "ta_ra_correlation",
    "te_aggregate",
    "weighted_kendall_tau",
    # synthetic data
    "GaussianMixtureSpec",
    "SyntheticZooSpec",
    "gen_easy_task",
    "gen_gaussian_mixture",
    "gen_hard_task",
    "gen_synthetic_zoo",
    # io
    "ModelManifest",
    "load_manifest",
    "load_score_table",
    "read_features",
    "write_features",
    # pipeline
    "PipelineConfig",
    "score_model",
]
