"""Hot numeric kernels, dispatched to numba or numpy.

The compiled and the vectorised implementations share signatures, so callers
import from here and never care which one is active. ``WLAB_BACKEND=numpy``
selects the fallback at import time.
"""
from .._backend import JIT_ENABLED, backend_name
from . import _numpy

if JIT_ENABLED:
    from . import _numba as _active
else:
    _active = _numpy

ray_hits = _active.ray_hits
winding_numbers = _active.winding_numbers
nearest_triangle = _active.nearest_triangle
linear_rhs = _active.linear_rhs
dp45_linear_step = _active.dp45_linear_step
build_bvh = _active.build_bvh

__all__ = [
    "backend_name",
    "ray_hits",
    "winding_numbers",
    "nearest_triangle",
    "linear_rhs",
    "dp45_linear_step",
    "build_bvh",
]
