"""Numba switch.

Hot kernels exist twice: a compiled loop version and a vectorized numpy
version.  ``BBM_WAVEKIT_NUMBA=0`` makes the numpy version the default; the
compiled one stays importable (when numba is installed) so the benchmark can
time both paths in one process.
"""
import os

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a soft dependency
    numba = None
    HAVE_NUMBA = False

_flag = os.environ.get("BBM_WAVEKIT_NUMBA", "1").strip().lower()
USE_NUMBA = HAVE_NUMBA and _flag not in ("0", "false", "no", "off")


def njit(**kwargs):
    def wrap(func):
        if HAVE_NUMBA:
            return numba.njit(cache=True, **kwargs)(func)
        return None
    return wrap


def backend():
    return "numba" if USE_NUMBA else "numpy"
