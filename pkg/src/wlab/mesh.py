"""Indexed triangle meshes, surfaces of revolution and mesh queries."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .bvh import BVH, build_bvh

# directions for inside/outside parity rays; irrational-looking on purpose
_PARITY_DIRS = np.array(
    [
        [0.5377, 0.8137, 0.2205],
        [-0.3129, 0.4301, 0.8469],
        [0.7152, -0.6138, 0.3345],
        [-0.1471, -0.5826, -0.7993],
        [0.9011, 0.1932, -0.3881],
    ]
)
_PARITY_DIRS /= np.linalg.norm(_PARITY_DIRS, axis=1)[:, None]


class MeshError(ValueError):
    pass


class OpenMeshError(MeshError):
    pass


class DegenerateStripError(MeshError):
    pass


@dataclass(frozen=True)
class RayHits:
    """Sorted hits per ray; ``t`` is inf-padded, ``tri`` is -1 padded."""

    t: np.ndarray
    tri: np.ndarray
    edge: np.ndarray
    count: np.ndarray


@dataclass(eq=False)
class TriMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_loops: list = field(default_factory=list)

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must have shape (n, 3)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError("triangles must have shape (m, 3)")
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)):
            raise MeshError("triangle index out of range")
        self.boundary_loops = [np.asarray(l, dtype=np.int64) for l in self.boundary_loops]

    # -- basic geometry -------------------------------------------------
    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    @cached_property
    def corners(self):
        v = self.vertices[self.triangles]
        return v[:, 0], v[:, 1], v[:, 2]

    @cached_property
    def area_vectors(self):
        """Per-triangle n * area (right-hand rule on the winding)."""
        a, b, c = self.corners
        return 0.5 * np.cross(b - a, c - a)

    @cached_property
    def areas(self):
        return np.linalg.norm(self.area_vectors, axis=1)

    @cached_property
    def face_normals(self):
        ar = self.areas
        return self.area_vectors / np.where(ar > 0, ar, 1.0)[:, None]

    @cached_property
    def vertex_normals(self):
        """Angle-weighted face normals (insensitive to how quads are split)."""
        a, b, c = self.corners
        fn = self.face_normals
        n = np.zeros_like(self.vertices)
        for k, (p, q, r) in enumerate(((a, b, c), (b, c, a), (c, a, b))):
            u = q - p
            w = r - p
            cosang = np.einsum("ij,ij->i", u, w) / np.maximum(
                np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1), 1e-300
            )
            ang = np.arccos(np.clip(cosang, -1.0, 1.0))
            np.add.at(n, self.triangles[:, k], ang[:, None] * fn)
        norm = np.linalg.norm(n, axis=1)
        return n / np.where(norm > 0, norm, 1.0)[:, None]

    def area(self):
        return float(self.areas.sum())

    def centroid(self):
        """Area-weighted centroid of the surface."""
        a, b, c = self.corners
        return (self.areas[:, None] * (a + b + c) / 3.0).sum(axis=0) / self.area()

    def signed_volume(self):
        a, b, c = self.corners
        return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)

    @cached_property
    def edges(self):
        """Unique undirected edges and how many triangles use each."""
        e = np.concatenate([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]])
        e.sort(axis=1)
        n = np.int64(max(1, self.n_vertices))
        keys, counts = np.unique(e[:, 0] * n + e[:, 1], return_counts=True)
        uniq = np.stack([keys // n, keys % n], axis=1)
        return uniq, counts

    def max_edge_length(self):
        uniq, _ = self.edges
        return float(np.linalg.norm(self.vertices[uniq[:, 0]] - self.vertices[uniq[:, 1]], axis=1).max())

    def euler_characteristic(self):
        used = np.unique(self.triangles)
        return int(used.size - self.edges[0].shape[0] + self.n_triangles)

    def is_closed(self):
        return bool(self.n_triangles) and bool(np.all(self.edges[1] == 2))

    def bounds(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def diameter(self):
        lo, hi = self.bounds()
        return float(np.linalg.norm(hi - lo))

    def sagitta(self):
        """Rough chord-to-surface deviation: |edge| * (normal turn) / 8, maximised."""
        uniq, _ = self.edges
        n = self.vertex_normals
        cosang = np.clip(np.einsum("ij,ij->i", n[uniq[:, 0]], n[uniq[:, 1]]), -1.0, 1.0)
        length = np.linalg.norm(self.vertices[uniq[:, 0]] - self.vertices[uniq[:, 1]], axis=1)
        return float((length * np.arccos(cosang)).max() / 8.0)

    def transformed(self, rotation=None, translation=None):
        v = self.vertices
        if rotation is not None:
            v = v @ np.asarray(rotation, dtype=float).T
        if translation is not None:
            v = v + np.asarray(translation, dtype=float)
        return TriMesh(v, self.triangles.copy(), [l.copy() for l in self.boundary_loops])

    def flipped(self):
        return TriMesh(self.vertices.copy(), self.triangles[:, ::-1].copy(), [l[::-1].copy() for l in self.boundary_loops])

    # -- topology -------------------------------------------------------
    def find_boundary_loops(self):
        """Ordered boundary cycles, following the winding of the owning triangle."""
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        srt = np.sort(directed, axis=1)
        key = srt[:, 0] * np.int64(max(1, self.n_vertices)) + srt[:, 1]
        uniq, inv, counts = np.unique(key, return_inverse=True, return_counts=True)
        inv = inv.ravel()
        boundary = directed[counts[inv] == 1]
        if len(boundary) == 0:
            return []
        nxt = {}
        for u, v in boundary:
            if int(u) in nxt:
                raise MeshError(f"non-manifold boundary at vertex {u}")
            nxt[int(u)] = int(v)
        loops = []
        seen = set()
        for start in list(nxt):
            if start in seen:
                continue
            loop = [start]
            seen.add(start)
            cur = nxt[start]
            while cur != start:
                if cur in seen or cur not in nxt:
                    raise MeshError("boundary edges do not form closed cycles")
                loop.append(cur)
                seen.add(cur)
                cur = nxt[cur]
            loops.append(np.array(loop, dtype=np.int64))
        return loops

    def check_manifold(self):
        uniq, counts = self.edges
        if np.any(counts > 2):
            raise MeshError("non-manifold mesh: an edge is shared by more than two triangles")
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        if np.unique(directed, axis=0).shape[0] != directed.shape[0]:
            raise MeshError("inconsistent winding: a directed edge appears twice")

    # -- spatial queries ------------------------------------------------
    @cached_property
    def bvh(self) -> BVH:
        return build_bvh(self.vertices[self.triangles])

    @cached_property
    def _tri_arrays(self):
        a, b, c = self.corners
        return np.ascontiguousarray(a), np.ascontiguousarray(b - a), np.ascontiguousarray(c - a)

    def ray_cast(self, origins, dirs, tmin=-np.inf, tmax=np.inf, max_hits=32) -> RayHits:
        origins = np.ascontiguousarray(np.atleast_2d(origins), dtype=float)
        dirs = np.ascontiguousarray(np.atleast_2d(dirs), dtype=float)
        if dirs.shape[0] == 1 and origins.shape[0] > 1:
            dirs = np.ascontiguousarray(np.repeat(dirs, origins.shape[0], axis=0))
        v0, e1, e2 = self._tri_arrays
        t, tri, edge, count = kernels.ray_hits(
            v0, e1, e2, *self.bvh.arrays, origins, dirs, float(tmin), float(tmax), int(max_hits)
        )
        return RayHits(t, tri, edge, count)

    def contains(self, points, max_tries=5):
        """Inside test by ray parity, re-casting along another direction on edge hits."""
        pts = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
        inside = np.zeros(len(pts), dtype=bool)
        todo = np.arange(len(pts))
        scale = max(self.diameter(), 1.0)
        for k in range(max_tries):
            if todo.size == 0:
                break
            hits = self.ray_cast(pts[todo], _PARITY_DIRS[k % len(_PARITY_DIRS)], tmin=0.0, max_hits=64)
            ambiguous = (hits.edge & np.isfinite(hits.t)).any(axis=1)
            ambiguous |= (np.abs(hits.t) < 1e-12 * scale).any(axis=1)
            ambiguous |= hits.count > hits.t.shape[1]
            if k == max_tries - 1:
                ambiguous[:] = False
            done = ~ambiguous
            inside[todo[done]] = (hits.count[done] % 2) == 1
            todo = todo[ambiguous]
        return inside

    def closest_points(self, points):
        """Exact distance to the mesh, nearest triangle index and closest point."""
        pts = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
        a, b, c = (np.ascontiguousarray(x) for x in self.corners)
        return kernels.nearest_triangle(a, b, c, *self.bvh.arrays, pts)

    def signed_distance(self, points):
        """Distance to the mesh, negative outside (closed meshes only)."""
        d, _, _ = self.closest_points(points)
        return np.where(self.contains(points), d, -d)

    def self_intersections(self, max_report=16):
        """Edges that pierce a triangle not incident to them (empty list if embedded)."""
        uniq, _ = self.edges
        p0 = self.vertices[uniq[:, 0]]
        d = self.vertices[uniq[:, 1]] - p0
        hits = self.ray_cast(p0, d, tmin=1e-9, tmax=1.0 - 1e-9, max_hits=8)
        found = []
        rows, cols = np.nonzero(hits.tri >= 0)
        for r, c in zip(rows, cols):
            tri = self.triangles[hits.tri[r, c]]
            if uniq[r, 0] in tri or uniq[r, 1] in tri:
                continue
            found.append((int(r), int(hits.tri[r, c])))
            if len(found) >= max_report:
                break
        return found


def merge(*meshes: TriMesh) -> TriMesh:
    """Disjoint union of meshes (no vertex welding)."""
    verts, tris, loops = [], [], []
    off = 0
    for m in meshes:
        verts.append(m.vertices)
        tris.append(m.triangles + off)
        loops.extend(l + off for l in m.boundary_loops)
        off += m.n_vertices
    return TriMesh(np.concatenate(verts), np.concatenate(tris), loops)


def weld(mesh: TriMesh, tol: float = 1e-9) -> TriMesh:
    """Merge vertices closer than ``tol``; triangles that collapse are dropped."""
    from scipy.spatial import cKDTree
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    n = mesh.n_vertices
    pairs = cKDTree(mesh.vertices).query_pairs(tol, output_type="ndarray")
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, label = connected_components(g, directed=False)
    # representative = first vertex of each component, keeps the original order
    first = np.full(label.max() + 1, n, dtype=np.int64)
    np.minimum.at(first, label, np.arange(n))
    keep = np.sort(first)
    new_index = np.empty(label.max() + 1, dtype=np.int64)
    new_index[label[keep]] = np.arange(keep.size)
    remap = new_index[label]
    tris = remap[mesh.triangles]
    ok = (tris[:, 0] != tris[:, 1]) & (tris[:, 1] != tris[:, 2]) & (tris[:, 0] != tris[:, 2])
    out = TriMesh(mesh.vertices[keep], tris[ok])
    out.boundary_loops = out.find_boundary_loops()
    return out


def mesh_from_rings(rings, close_start=False, close_end=False):
    """Mesh a stack of closed rings of equal size.

    ``rings`` has shape (n_rows, n_cols, 3). Consecutive rows are joined by
    quads split into two triangles, wound so the normal is ``d/dcol x d/drow``
    (outward for counter-clockwise rings stacked upward). A row whose points
    all coincide is treated as a pole. ``close_start``/``close_end`` glue a fan
    to the first/last row around its centroid.
    """
    rings = np.asarray(rings, dtype=float)
    n_rows, n_cols, _ = rings.shape
    if n_cols < 3 or n_rows < 1:
        raise MeshError("need at least 3 points per ring and one ring")
    rows = list(rings)
    if close_start:
        rows.insert(0, np.repeat(rings[0].mean(axis=0)[None, :], n_cols, axis=0))
    if close_end:
        rows.append(np.repeat(rings[-1].mean(axis=0)[None, :], n_cols, axis=0))

    verts = []
    index = []
    is_pole = []
    for row in rows:
        span = np.linalg.norm(row - row.mean(axis=0), axis=1).max()
        scale = max(1.0, float(np.abs(row).max()))
        if span <= 1e-12 * scale:
            index.append(np.full(n_cols, len(verts), dtype=np.int64))
            verts.append(row.mean(axis=0))
            is_pole.append(True)
        else:
            index.append(np.arange(len(verts), len(verts) + n_cols, dtype=np.int64))
            verts.extend(row)
            is_pole.append(False)
    verts = np.array(verts)

    tris = []
    for i in range(len(rows) - 1):
        r0, r1 = index[i], index[i + 1]
        if is_pole[i] and is_pole[i + 1]:
            raise DegenerateStripError(f"consecutive pole rows {i} and {i + 1}")
        if not (is_pole[i] or is_pole[i + 1]):
            d = np.linalg.norm(verts[r0] - verts[r1], axis=1)
            if np.any(d == 0.0):
                raise DegenerateStripError(f"rows {i} and {i + 1} share a point")
        j = np.arange(n_cols)
        jn = (j + 1) % n_cols
        t1 = np.stack([r0[j], r0[jn], r1[jn]], axis=1)
        t2 = np.stack([r0[j], r1[jn], r1[j]], axis=1)
        for t in (t1, t2):
            keep = (t[:, 0] != t[:, 1]) & (t[:, 1] != t[:, 2]) & (t[:, 0] != t[:, 2])
            tris.append(t[keep])
    tris = np.concatenate(tris) if tris else np.zeros((0, 3), dtype=np.int64)

    loops = []
    if not is_pole[0]:
        loops.append(index[0].copy())
    if not is_pole[-1] and len(rows) > 1:
        loops.append(index[-1][::-1].copy())
    return TriMesh(verts, tris, loops)


def revolve_samples(y, z, n_theta, center=(0.0, 0.0), cap_start=0, cap_end=0, pole_tol=None):
    """Surface of revolution of the profile (y(s), z(s)) about a vertical axis.

    ``cap_start``/``cap_end`` give the number of concentric rings of a planar
    disk glued to that end (0 = leave open). An end whose radius is below
    ``pole_tol`` is collapsed onto the axis.
    """
    if n_theta < 3:
        raise MeshError("n_theta must be at least 3")
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if pole_tol is None:
        pole_tol = 1e-3 * float(np.max(np.abs(y)))
    ys = list(y)
    zs = list(z)
    if abs(ys[0]) < pole_tol:
        ys[0] = 0.0
    if abs(ys[-1]) < pole_tol:
        ys[-1] = 0.0
    if cap_start and ys[0] != 0.0:
        y0, z0 = ys[0], zs[0]
        ys = [y0 * k / cap_start for k in range(cap_start)] + ys
        zs = [z0] * cap_start + zs
    if cap_end and ys[-1] != 0.0:
        y1, z1 = ys[-1], zs[-1]
        ys = ys + [y1 * k / cap_end for k in range(cap_end - 1, -1, -1)]
        zs = zs + [z1] * cap_end
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    ys = np.array(ys)
    zs = np.array(zs)
    rings = np.empty((len(ys), n_theta, 3))
    rings[:, :, 0] = center[0] + ys[:, None] * np.cos(theta)[None, :]
    rings[:, :, 1] = center[1] + ys[:, None] * np.sin(theta)[None, :]
    rings[:, :, 2] = zs[:, None]
    return mesh_from_rings(rings)


def disk_cap(radius, z, n_theta, n_rings=None, center=(0.0, 0.0), normal_up=True):
    """Planar disk at height ``z`` sharing the vertex layout of a revolved parallel."""
    if n_rings is None:
        n_rings = max(2, n_theta // 8)
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    radii = radius * np.arange(n_rings, -1, -1) / n_rings  # rim first, centre last
    rings = np.empty((n_rings + 1, n_theta, 3))
    rings[:, :, 0] = center[0] + radii[:, None] * np.cos(theta)[None, :]
    rings[:, :, 1] = center[1] + radii[:, None] * np.sin(theta)[None, :]
    rings[:, :, 2] = z
    m = mesh_from_rings(rings)
    # rows shrink toward the centre, so the natural winding points up
    return m if normal_up else m.flipped()


def icosphere_directions():
    """The 26 nonzero directions of {-1, 0, 1}^3, normalised."""
    out = []
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            for k in (-1, 0, 1):
                if i or j or k:
                    out.append((i, j, k))
    d = np.array(out, dtype=float)
    return d / np.linalg.norm(d, axis=1)[:, None]


def rotation_matrix(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    x, y, z = axis
    c, s = math.cos(angle), math.sin(angle)
    C = 1.0 - c
    return np.array(
        [
            [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
            [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
            [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
        ]
    )
