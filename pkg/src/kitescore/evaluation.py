"""Correlation-based evaluation of transferability scores.

Per target, estimator scores are compared against ground-truth transfer
accuracies via Pearson correlation and a weighted rank correlation; the
final figure is the unweighted mean across targets.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import backends
from .errors import (
    ConstantSeries,
    ConstantTargetWarning,
    DimMismatch,
    SchemaError,
    TooFewItems,
)
from .kernels import KernelMatrix

# ranks come from the ground-truth ordering; each pair is weighted by
# 1/(1+r_i) + 1/(1+r_j) so disagreements among top-ranked items cost more
WEIGHTING_SCHEME = "additive-hyperbolic, truth-ranked, ties averaged"


def pearson(x: list[float] | np.ndarray, y: list[float] | np.ndarray) -> float:
    """Sample Pearson product-moment correlation of two equal-length series."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DimMismatch("pearson needs two equal-length 1-D series")
    if x.size < 3:
        raise TooFewItems(f"pearson needs >= 3 points, got {x.size}")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ConstantSeries("pearson is undefined on a constant series")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.sum(xc * xc) * np.sum(yc * yc))
    if denom == 0.0:
        raise ConstantSeries("pearson is undefined on a constant series")
    return float(min(1.0, max(-1.0, np.sum(xc * yc) / denom)))


def _average_ranks_desc(truth: np.ndarray) -> np.ndarray:
    """0-based ranks by descending value, tied values share the mean rank."""
    order = np.argsort(-truth, kind="stable")
    ranks = np.empty(truth.size, dtype=np.float64)
    pos = 0
    while pos < truth.size:
        end = pos
        while end + 1 < truth.size and truth[order[end + 1]] == truth[order[pos]]:
            end += 1
        ranks[order[pos : end + 1]] = (pos + end) / 2.0
        pos = end + 1
    return ranks


def weighted_kendall_tau(scores: list[float] | np.ndarray, truth: list[float] | np.ndarray) -> float:
    """Weighted Kendall rank correlation between scores and ground truth.

    Every pair (i, j) carries weight w = 1/(1+r_i) + 1/(1+r_j) with r the
    descending average rank under ``truth``.  Pairs agreeing in order add
    +w, disagreeing add -w, half-ties add 0 with their weight kept in the
    denominator, and pairs tied in both series are excluded entirely.
    This O(n^2) form is the definition; there is no approximation.
    """
    s = np.asarray(scores, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if s.shape != t.shape or s.ndim != 1:
        raise DimMismatch("weighted_kendall_tau needs two equal-length 1-D series")
    n = s.size
    if n < 2:
        raise TooFewItems(f"weighted_kendall_tau needs >= 2 items, got {n}")
    r = _average_ranks_desc(t)
    w = 1.0 / (1.0 + r)
    pair_w = w[:, None] + w[None, :]
    sign_s = np.sign(s[:, None] - s[None, :])
    sign_t = np.sign(t[:, None] - t[None, :])
    both_tied = (sign_s == 0) & (sign_t == 0)
    iu = np.triu_indices(n, k=1)
    agreement = (sign_s * sign_t)[iu]
    weights = pair_w[iu]
    included = ~both_tied[iu]
    # exact sums: equals the pairwise enumeration bit-for-bit in any order
    denom = backends.sum_exact(np.ascontiguousarray(weights[included]))
    if denom == 0.0:
        raise ConstantSeries("all pairs tied in both series")
    num = backends.sum_exact(np.ascontiguousarray(agreement * weights))
    return num / denom


@dataclass
class ScoreTable:
    """Scores and ground-truth accuracies keyed by (model_id, target_id).

    ``accuracy_unit`` declares whether truth values are fractions in
    [0, 1] or percents; correlations are unit-invariant but reports echo
    the declared unit.
    """

    truth: dict[tuple[str, str], float] = field(default_factory=dict)
    scores: dict[str, dict[tuple[str, str], float]] = field(default_factory=dict)
    accuracy_unit: str = "fraction"

    def add_truth(self, model_id: str, target_id: str, accuracy: float) -> None:
        key = (model_id, target_id)
        if key in self.truth:
            raise SchemaError(f"duplicate (model_id, target_id) pair {key}")
        self.truth[key] = float(accuracy)

    def add_score(self, estimator: str, model_id: str, target_id: str, value: float) -> None:
        self.scores.setdefault(estimator, {})[(model_id, target_id)] = float(value)

    def targets(self) -> list[str]:
        return sorted({t for _, t in self.truth})

    def models_for(self, target_id: str) -> list[str]:
        return sorted({m for m, t in self.truth if t == target_id})


@dataclass
class TargetResult:
    target_id: str
    pearson: float
    weighted_tau: float
    num_models: int


@dataclass
class EvalReport:
    """Per-target and mean correlations for one estimator."""

    estimator: str
    per_target: list[TargetResult]
    mean_pearson: float
    mean_tau: float
    excluded: list[tuple[str, str]] = field(default_factory=list)  # (target, reason)
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "per_target": [
                {
                    "target_id": r.target_id,
                    "pearson": r.pearson,
                    "weighted_tau": r.weighted_tau,
                    "num_models": r.num_models,
                }
                for r in self.per_target
            ],
            "mean_pearson": self.mean_pearson,
            "mean_tau": self.mean_tau,
            "excluded": [{"target_id": t, "reason": r} for t, r in self.excluded],
            "metadata": self.metadata,
        }

    def write_json(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["target_id", "num_models", "pearson", "weighted_tau"])
            for r in self.per_target:
                writer.writerow([r.target_id, r.num_models, repr(r.pearson), repr(r.weighted_tau)])
            writer.writerow(["MEAN", "", repr(self.mean_pearson), repr(self.mean_tau)])


def te_aggregate(table: ScoreTable, estimator: str) -> EvalReport:
    """Aggregate one estimator's scores into per-target and mean correlations.

    Targets with a constant series are excluded from the means with a
    warning instead of failing the whole run.
    """
    if estimator not in table.scores:
        raise SchemaError(f"no scores recorded for estimator {estimator!r}")
    per_target: list[TargetResult] = []
    excluded: list[tuple[str, str]] = []
    col = table.scores[estimator]
    for target_id in table.targets():
        models = table.models_for(target_id)
        if len(models) < 3:
            raise SchemaError(
                f"target {target_id!r} has {len(models)} models; need >= 3 for correlation"
            )
        missing = [m for m in models if (m, target_id) not in col]
        if missing:
            raise SchemaError(f"target {target_id!r} missing scores for models {missing}")
        xs = np.array([col[(m, target_id)] for m in models])
        ys = np.array([table.truth[(m, target_id)] for m in models])
        try:
            pc = pearson(xs, ys)
            tau = weighted_kendall_tau(xs, ys)
        except ConstantSeries as exc:
            warnings.warn(
                f"target {target_id!r} excluded from aggregation: {exc}",
                ConstantTargetWarning,
            )
            excluded.append((target_id, str(exc)))
            continue
        per_target.append(TargetResult(target_id, pc, tau, len(models)))
    if not per_target:
        raise ConstantSeries("every target was excluded; nothing to aggregate")
    mean_pc = float(np.mean([r.pearson for r in per_target]))
    mean_tau = float(np.mean([r.weighted_tau for r in per_target]))
    return EvalReport(
        estimator=estimator,
        per_target=per_target,
        mean_pearson=mean_pc,
        mean_tau=mean_tau,
        excluded=excluded,
        metadata={"accuracy_unit": table.accuracy_unit, "tau_weighting": WEIGHTING_SCHEME},
    )


def ta_ra_correlation(pairs: list[tuple[float, float]]) -> float:
    """Pearson correlation between per-model TA and RA scores."""
    if len(pairs) < 3:
        raise TooFewItems(f"need >= 3 models, got {len(pairs)}")
    ta = [p[0] for p in pairs]
    ra = [p[1] for p in pairs]
    return pearson(ta, ra)


def kernel_value_histogram(
    kernel: KernelMatrix, bins: int = 32
) -> tuple[np.ndarray, np.ndarray, float]:
    """Histogram and IQR of the off-diagonal kernel values.

    Returns (bin_edges, counts, interquartile_range).  Counts sum to
    n(n-1); a constant matrix occupies a single bin.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    n = kernel.n
    mask = ~np.eye(n, dtype=bool)
    values = kernel.data[mask]
    counts, edges = np.histogram(values, bins=bins)
    q75, q25 = np.percentile(values, [75.0, 25.0])
    return edges, counts, float(q75 - q25)
