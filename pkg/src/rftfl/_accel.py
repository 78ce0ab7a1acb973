"""Backend selection for the compiled kernels.

Set ``RFTFL_DISABLE_NUMBA=1`` to force the pure-numpy path.
"""

from __future__ import annotations

import os

_FALSY = {"", "0", "false", "no", "off"}

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("RFTFL_DISABLE_NUMBA", "").strip().lower() in _FALSY


def njit(fn):
    """Compile ``fn`` in nopython mode, or return it unchanged without numba."""
    if not HAS_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
