"""Switch between numba-compiled kernels and their numpy fallbacks.

Set ``MGTAPF_DISABLE_NUMBA=1`` before importing :mod:`mgtapf` to run every
kernel through the pure-numpy path.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

DISABLED = os.environ.get("MGTAPF_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = numba is not None and not DISABLED


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    if numba is None:
        return func
    return numba.njit(cache=True)(func)
