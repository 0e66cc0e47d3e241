"""Backend selection for the numeric kernels.

``WLAB_BACKEND=numpy`` forces the pure-numpy code paths; anything else (or an
unset variable) uses numba when it can be imported.
"""
import os

BACKEND_ENV = "WLAB_BACKEND"


def _want_numba():
    return os.environ.get(BACKEND_ENV, "numba").strip().lower() != "numpy"


try:
    if not _want_numba():
        raise ImportError("numba disabled by " + BACKEND_ENV)
    from numba import njit, prange

    JIT_ENABLED = True
except ImportError:
    JIT_ENABLED = False

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper

    prange = range


def backend_name():
    return "numba" if JIT_ENABLED else "numpy"
