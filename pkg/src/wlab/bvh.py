"""Axis-aligned bounding-volume hierarchy over triangles.

The tree is stored as flat arrays so the compiled kernels can traverse it
without Python objects. Leaves hold a contiguous run of ``tri_order``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class BVH:
    node_lo: np.ndarray
    node_hi: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_start: np.ndarray
    node_count: np.ndarray
    tri_order: np.ndarray

    @property
    def arrays(self):
        return (
            self.node_lo,
            self.node_hi,
            self.node_left,
            self.node_right,
            self.node_start,
            self.node_count,
            self.tri_order,
        )

    @property
    def n_nodes(self):
        return self.node_lo.shape[0]


def build_bvh(tri_vertices: np.ndarray, leaf_size: int = 4) -> BVH:
    """Median-split BVH; ``tri_vertices`` has shape (n_tri, 3, 3)."""
    n = tri_vertices.shape[0]
    if n == 0:
        raise ValueError("cannot build a BVH over zero triangles")
    # pad boxes so axis-parallel rays through flat triangles still register
    pad = 1e-12 * max(1.0, float(np.abs(tri_vertices).max()))
    tlo = np.ascontiguousarray(tri_vertices.min(axis=1) - pad)
    thi = np.ascontiguousarray(tri_vertices.max(axis=1) + pad)
    return BVH(*kernels.build_bvh(tlo, thi, int(leaf_size)))
