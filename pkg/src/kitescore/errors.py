"""Exception and warning taxonomy.

Two broad families matter to the CLI exit codes: configuration problems
(bad flags, malformed files, mismatched shapes) and degenerate inputs
(constant features, constant labels, too little data).
"""

from __future__ import annotations


class KitescoreError(Exception):
    """Base class for all package errors."""


class ConfigError(KitescoreError):
    """User-fixable configuration problem (CLI exit code 2)."""


class DegenerateInputError(KitescoreError):
    """Data is structurally unusable for the requested score (exit code 3)."""


# kernel construction
class NonFiniteInput(DegenerateInputError):
    """Feature or kernel data contains NaN or infinity."""


class InvalidBandwidth(ConfigError):
    """Kernel bandwidth sigma must be positive."""


class DegenerateKernel(DegenerateInputError):
    """Kernel matrix has zero Frobenius norm (constant features or labels)."""


# estimators
class DegenerateRA(DegenerateInputError):
    """Random-alignment denominator below the 1e-12 floor."""


class TooFewSamples(DegenerateInputError):
    """Not enough samples for the requested estimator (e.g. n <= k)."""


class UnknownEstimator(ConfigError):
    """Estimator name not in the registry."""


# preprocessing
class DimMismatch(ConfigError):
    """Matrix dimensions do not line up."""


class ClassTooSmall(DegenerateInputError):
    """A class has fewer than 2 samples in the probe pool."""


# evaluation
class ConstantSeries(DegenerateInputError):
    """Correlation is undefined on a constant series."""


class TooFewItems(DegenerateInputError):
    """Rank correlation needs at least 2 items."""


# file formats
class FormatError(ConfigError):
    """Base class for interchange-format violations."""


class BadMagic(FormatError):
    """File does not start with the feature-file magic bytes."""


class UnsupportedVersion(FormatError):
    """Unknown format version or dtype code."""


class TruncatedPayload(FormatError):
    """File ends before the header-declared payload does."""


class NonFiniteValue(DegenerateInputError):
    """Feature file payload contains NaN or infinity."""


class SchemaError(ConfigError):
    """Manifest or table violates its schema."""


class DuplicateModelId(SchemaError):
    """Manifest lists the same model_id twice."""


class MissingFile(SchemaError):
    """Manifest references a file that does not exist."""


# warnings
class RankDeficientWarning(UserWarning):
    """Requested more principal components than the numerical rank."""


class ProbeCappedWarning(UserWarning):
    """Probe target size exceeded the pool; probe was capped."""


class ConstantTargetWarning(UserWarning):
    """A target was excluded from aggregation (constant series)."""
