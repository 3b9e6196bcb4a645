"""Backend selection: compiled core if available, pure Python otherwise.

Set ``KITESCORE_BACKEND=python`` to force the fallback (used by the
benchmark and the parity tests).  Both backends produce correctly rounded
reductions, so scores agree bit-for-bit; only distance kernels may differ
in the last ulp (different but equally valid summation orders).
"""

from __future__ import annotations

import os

from . import _core_py

if os.environ.get("KITESCORE_BACKEND", "").lower() == "python":
    _impl = _core_py
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _core_py
        BACKEND = "python"

sum_exact = _impl.sum_exact
dot_exact = _impl.dot_exact
row_sums_exact = _impl.row_sums_exact
pairwise_sq_dists = _impl.pairwise_sq_dists
pairwise_l1_dists = _impl.pairwise_l1_dists
linear_gram = _impl.linear_gram


def backend_name() -> str:
    """Which implementation is active: "compiled" or "python"."""
    return BACKEND
