"""Optional numba acceleration.

Set ``FLEXMATCH_DISABLE_NUMBA=1`` to run every kernel through its pure
Python / numpy path. The flag is read once, at import time.
"""
import os

_DISABLED = os.environ.get("FLEXMATCH_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

USE_NUMBA = numba is not None


def jit(fn):
    """``numba.njit(cache=True)`` when acceleration is on, identity otherwise."""
    if USE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
