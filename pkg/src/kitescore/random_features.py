"""Untrained-network features: seed-averaged random ReLU maps.

The random features are the elementwise mean over ``num_seeds``
independently initialized forward passes; averaging happens on the
features, before any kernel is built, and the per-seed order is fixed.
Randomness comes from counter-based Philox streams keyed by a labeled
hash, so outputs are bit-identical across platforms and thread counts.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatch
from .kernels import FeatureMatrix

INIT_SCHEMES = ("xavier_normal", "he_normal", "he_uniform")


def derive_seed(*parts: object) -> int:
    """Stable 64-bit child seed from labeled parts (order-sensitive)."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


@dataclass
class RandomNetSpec:
    """Topology and initialization of the untrained feed-forward map."""

    input_dim: int
    output_dim: int
    hidden_widths: list[int] = field(default_factory=lambda: [512, 256])
    init: str = "he_normal"
    num_seeds: int = 5
    base_seed: int = 0

    def __post_init__(self) -> None:
        dims = [self.input_dim, *self.hidden_widths, self.output_dim]
        if any(d < 1 for d in dims):
            raise ValueError("all layer dims must be >= 1")
        if self.num_seeds < 1:
            raise ValueError("num_seeds must be >= 1")
        if self.init not in INIT_SCHEMES:
            raise ValueError(f"unknown init scheme {self.init!r}; known: {INIT_SCHEMES}")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [self.input_dim, *self.hidden_widths, self.output_dim]
        return list(zip(dims[:-1], dims[1:]))


def init_weights(shape: tuple[int, int], scheme: str, seed: int) -> np.ndarray:
    """Weight matrix of the given (fan_in, fan_out) shape.

    xavier_normal: N(0, 2/(fan_in+fan_out)); he_normal: N(0, 2/fan_in);
    he_uniform: U(-sqrt(6/fan_in), +sqrt(6/fan_in)).
    """
    fan_in, fan_out = shape
    if fan_in < 1 or fan_out < 1:
        raise ValueError("fan_in and fan_out must be >= 1")
    rng = _rng(seed)
    if scheme == "xavier_normal":
        return rng.normal(0.0, np.sqrt(2.0 / (fan_in + fan_out)), size=shape)
    if scheme == "he_normal":
        return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)
    if scheme == "he_uniform":
        limit = np.sqrt(6.0 / fan_in)
        return rng.uniform(-limit, limit, size=shape)
    raise ValueError(f"unknown init scheme {scheme!r}")


def _forward_one_seed(x: np.ndarray, spec: RandomNetSpec, seed_value: int) -> np.ndarray:
    h = x
    layer_dims = spec.layer_dims
    last = len(layer_dims) - 1
    for li, shape in enumerate(layer_dims):
        w = init_weights(shape, spec.init, derive_seed("mlp-init", seed_value, li))
        h = h @ w  # biases are zero under all schemes
        if li != last:
            h = np.maximum(h, 0.0)
    return h


def random_mlp_features(raw: FeatureMatrix, spec: RandomNetSpec) -> FeatureMatrix:
    """Seed-averaged features of an untrained ReLU network on ``raw``.

    Runs one forward pass per seed value in [base_seed, base_seed +
    num_seeds) and returns the elementwise mean, accumulated in seed
    order.
    """
    if raw.d != spec.input_dim:
        raise DimMismatch(f"raw dim {raw.d} != spec input_dim {spec.input_dim}")
    acc = np.zeros((raw.n, spec.output_dim), dtype=np.float64)
    for offset in range(spec.num_seeds):
        acc += _forward_one_seed(raw.data, spec, spec.base_seed + offset)
    return FeatureMatrix(acc / spec.num_seeds, provenance="random")


def gaussian_random_features(n: int, d: int, seed: int) -> FeatureMatrix:
    """Data-independent baseline: i.i.d. standard-normal features."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    rng = _rng(derive_seed("gaussian-features", seed))
    return FeatureMatrix(rng.standard_normal((n, d)), provenance="random")
