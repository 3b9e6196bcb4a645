"""Benchmark the compiled core against the pure-Python fallback.

Times the hot kernels (pairwise distances, Gram matrix, exact reductions)
and one full scoring call on probe-sized inputs.  Run from the repo root:

    python benchmarks/bench_backends.py [--n 500] [--d 32] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from kitescore import _core_py
from kitescore.estimators import ScoreRequest, score_kite
from kitescore.kernels import FeatureMatrix, LabelVector

try:
    from kitescore import _core
except ImportError:
    _core = None


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best * 1000.0


def bench_kernels(n: int, d: int, repeat: int) -> None:
    rng = np.random.default_rng(0)
    x = np.ascontiguousarray(rng.standard_normal((n, d)))
    k = np.ascontiguousarray(rng.standard_normal((n, n)))
    k = np.ascontiguousarray((k + k.T) / 2)
    flat = np.ascontiguousarray(k.ravel())

    cases = [
        ("pairwise_sq_dists", lambda impl: impl.pairwise_sq_dists(x)),
        ("pairwise_l1_dists", lambda impl: impl.pairwise_l1_dists(x)),
        ("linear_gram", lambda impl: impl.linear_gram(x)),
        ("row_sums_exact", lambda impl: impl.row_sums_exact(k)),
        ("dot_exact (n^2)", lambda impl: impl.dot_exact(flat, flat)),
    ]
    print(f"{'kernel':<20} {'python (ms)':>12} {'compiled (ms)':>14} {'speedup':>9}")
    for name, call in cases:
        t_py = _time(lambda: call(_core_py), repeat)
        if _core is None:
            print(f"{name:<20} {t_py:>12.3f} {'n/a':>14} {'n/a':>9}")
            continue
        t_cy = _time(lambda: call(_core), repeat)
        print(f"{name:<20} {t_py:>12.3f} {t_cy:>14.3f} {t_py / t_cy:>8.1f}x")


def bench_score(n: int, d: int, repeat: int) -> None:
    rng = np.random.default_rng(1)
    pretrained = FeatureMatrix(rng.standard_normal((n, d)), "pretrained")
    random_feats = FeatureMatrix(rng.standard_normal((n, d)), "random")
    labels = LabelVector(rng.integers(0, 8, n), 8)
    request = ScoreRequest(pretrained=pretrained, labels=labels, random=random_feats)
    t = _time(lambda: score_kite(request), repeat)
    from kitescore import backend_name

    print(f"\nscore_kite n={n} d={d} linear kernel [{backend_name()} backend]: {t:.1f} ms")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=500)
    parser.add_argument("--d", type=int, default=32)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _core is None:
        print("compiled core not available; showing python fallback only\n")
    bench_kernels(args.n, args.d, args.repeat)
    bench_score(args.n, args.d, args.repeat)


if __name__ == "__main__":
    main()
