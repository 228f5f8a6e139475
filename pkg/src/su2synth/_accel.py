"""Optional numba acceleration.

Kernels are written once as plain Python loops and compiled with
``numba.njit`` when available. Setting ``SU2SYNTH_DISABLE_NUMBA=1`` (or
running without numba installed) selects the pure-numpy fallback paths
instead; those live next to each kernel and are chosen at call time
through :data:`USE_NUMBA`.
"""
from __future__ import annotations

import os

_DISABLED = os.environ.get("SU2SYNTH_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, identity decorator otherwise."""
    if HAS_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
