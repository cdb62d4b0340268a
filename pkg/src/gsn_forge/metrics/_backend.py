"""Pick the compiled kernels when importable, else the pure-Python ones.

Set ``GSNFORGE_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

_compiled = None
if os.environ.get("GSNFORGE_PURE_PYTHON", "") != "1":
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"

# The compiled Kendall kernel is a quadratic pair scan; past this size the
# O(n log n) Python version is faster (see benchmarks/bench_kernels.py).
KENDALL_COMPILED_MAX = 600


def lcs_length(a: str, b: str) -> int:
    if _compiled is not None:
        return _compiled.lcs_length(a, b)
    return _kernels_py.lcs_length(a, b)


def kendall_counts(x, y) -> tuple[int, int, int, int]:
    if _compiled is not None and len(x) <= KENDALL_COMPILED_MAX:
        try:
            return tuple(_compiled.kendall_counts(x, y))
        except (TypeError, ValueError):
            # Non-numeric ordinals; the fallback only needs ordering.
            pass
    return _kernels_py.kendall_counts(x, y)
