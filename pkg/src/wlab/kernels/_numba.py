"""numba implementations of the hot kernels."""
import math

import numpy as np
from numba import njit

from . import _scalar

BARY_EPS = 1e-12
EDGE_EPS = 1e-9
PARALLEL_EPS = 1e-10  # |cos| between ray and triangle normal

linear_rhs = njit(cache=True)(_scalar.linear_rhs)
dp45_linear_step = njit(_scalar.make_dp45_linear_step(linear_rhs))


@njit(cache=True)
def _ray_tri(ox, oy, oz, dx, dy, dz, v0, e1, e2):
    # Moller-Trumbore; returns (t, min barycentric) or (nan, 0).
    px = dy * e2[2] - dz * e2[1]
    py = dz * e2[0] - dx * e2[2]
    pz = dx * e2[1] - dy * e2[0]
    det = e1[0] * px + e1[1] * py + e1[2] * pz
    # det = <d, e1 x e2>; reject rays (nearly) parallel to the triangle plane
    nx = e1[1] * e2[2] - e1[2] * e2[1]
    ny = e1[2] * e2[0] - e1[0] * e2[2]
    nz = e1[0] * e2[1] - e1[1] * e2[0]
    scale = math.sqrt((nx * nx + ny * ny + nz * nz) * (dx * dx + dy * dy + dz * dz))
    if not abs(det) > PARALLEL_EPS * scale:
        return np.nan, 0.0
    inv = 1.0 / det
    tx = ox - v0[0]
    ty = oy - v0[1]
    tz = oz - v0[2]
    u = (tx * px + ty * py + tz * pz) * inv
    if u < -BARY_EPS or u > 1.0 + BARY_EPS:
        return np.nan, 0.0
    qx = ty * e1[2] - tz * e1[1]
    qy = tz * e1[0] - tx * e1[2]
    qz = tx * e1[1] - ty * e1[0]
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < -BARY_EPS or u + v > 1.0 + BARY_EPS:
        return np.nan, 0.0
    t = (e2[0] * qx + e2[1] * qy + e2[2] * qz) * inv
    w = 1.0 - u - v
    m = u
    if v < m:
        m = v
    if w < m:
        m = w
    return t, m


@njit(cache=True)
def _box_hit(lo, hi, ox, oy, oz, ix, iy, iz, tmin, tmax):
    t0 = tmin
    t1 = tmax
    a = (lo[0] - ox) * ix
    b = (hi[0] - ox) * ix
    if a > b:
        a, b = b, a
    if a > t0:
        t0 = a
    if b < t1:
        t1 = b
    a = (lo[1] - oy) * iy
    b = (hi[1] - oy) * iy
    if a > b:
        a, b = b, a
    if a > t0:
        t0 = a
    if b < t1:
        t1 = b
    a = (lo[2] - oz) * iz
    b = (hi[2] - oz) * iz
    if a > b:
        a, b = b, a
    if a > t0:
        t0 = a
    if b < t1:
        t1 = b
    return t0 <= t1


@njit(cache=True)
def _safe_inv(d):
    if abs(d) < 1e-300:
        return 1e300 if d >= 0.0 else -1e300
    return 1.0 / d


@njit(cache=True)
def ray_hits(v0, e1, e2, node_lo, node_hi, node_left, node_right, node_start,
             node_count, tri_order, origins, dirs, tmin, tmax, max_hits):
    n = origins.shape[0]
    hit_t = np.full((n, max_hits), np.inf)
    hit_tri = np.full((n, max_hits), -1, dtype=np.int64)
    hit_edge = np.zeros((n, max_hits), dtype=np.bool_)
    n_hits = np.zeros(n, dtype=np.int64)
    stack = np.empty(128, dtype=np.int64)
    for r in range(n):
        ox, oy, oz = origins[r, 0], origins[r, 1], origins[r, 2]
        dx, dy, dz = dirs[r, 0], dirs[r, 1], dirs[r, 2]
        ix, iy, iz = _safe_inv(dx), _safe_inv(dy), _safe_inv(dz)
        sp = 0
        stack[sp] = 0
        sp += 1
        cnt = 0
        while sp > 0:
            sp -= 1
            node = stack[sp]
            if not _box_hit(node_lo[node], node_hi[node], ox, oy, oz, ix, iy, iz, tmin, tmax):
                continue
            c = node_count[node]
            if c > 0:
                s0 = node_start[node]
                for k in range(s0, s0 + c):
                    tri = tri_order[k]
                    t, m = _ray_tri(ox, oy, oz, dx, dy, dz, v0[tri], e1[tri], e2[tri])
                    if not (t >= tmin and t <= tmax):
                        continue
                    cnt += 1
                    # insertion into the sorted, capped hit list
                    j = min(cnt, max_hits) - 1
                    if cnt > max_hits and t >= hit_t[r, j]:
                        continue
                    while j > 0 and hit_t[r, j - 1] > t:
                        hit_t[r, j] = hit_t[r, j - 1]
                        hit_tri[r, j] = hit_tri[r, j - 1]
                        hit_edge[r, j] = hit_edge[r, j - 1]
                        j -= 1
                    hit_t[r, j] = t
                    hit_tri[r, j] = tri
                    hit_edge[r, j] = m < EDGE_EPS
            else:
                stack[sp] = node_left[node]
                stack[sp + 1] = node_right[node]
                sp += 2
        n_hits[r] = cnt
    return hit_t, hit_tri, hit_edge, n_hits


@njit(cache=True)
def winding_numbers(poly, pts, eps):
    m = poly.shape[0]
    n = pts.shape[0]
    wn = np.zeros(n, dtype=np.int64)
    on_curve = np.zeros(n, dtype=np.bool_)
    for k in range(n):
        px = pts[k, 0]
        py = pts[k, 1]
        w = 0
        for i in range(m):
            x0 = poly[i, 0]
            y0 = poly[i, 1]
            x1 = poly[(i + 1) % m, 0]
            y1 = poly[(i + 1) % m, 1]
            cr = (x1 - x0) * (py - y0) - (px - x0) * (y1 - y0)
            ex = x1 - x0
            ey = y1 - y0
            seg2 = ex * ex + ey * ey
            if cr * cr <= eps * eps * seg2:
                dot = (px - x0) * ex + (py - y0) * ey
                if dot >= -eps * np.sqrt(seg2) and dot <= seg2 + eps * np.sqrt(seg2):
                    on_curve[k] = True
            if y0 <= py:
                if y1 > py and cr > 0.0:
                    w += 1
            elif y1 <= py and cr < 0.0:
                w -= 1
        wn[k] = w
    return wn, on_curve


@njit(cache=True)
def _closest_on_tri(p, a, b, c):
    # Ericson, Real-Time Collision Detection, 5.1.5
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = ab @ ap
    d2 = ac @ ap
    if d1 <= 0.0 and d2 <= 0.0:
        return a
    bp = p - b
    d3 = ab @ bp
    d4 = ac @ bp
    if d3 >= 0.0 and d4 <= d3:
        return b
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        return a + (d1 / (d1 - d3)) * ab
    cp = p - c
    d5 = ab @ cp
    d6 = ac @ cp
    if d6 >= 0.0 and d5 <= d6:
        return c
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        return a + (d2 / (d2 - d6)) * ac
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b)
    denom = 1.0 / (va + vb + vc)
    return a + ab * (vb * denom) + ac * (vc * denom)


@njit(cache=True)
def _box_dist2(lo, hi, p):
    d2 = 0.0
    for k in range(3):
        if p[k] < lo[k]:
            d2 += (lo[k] - p[k]) ** 2
        elif p[k] > hi[k]:
            d2 += (p[k] - hi[k]) ** 2
    return d2


@njit(cache=True)
def nearest_triangle(va, vb, vc, node_lo, node_hi, node_left, node_right,
                     node_start, node_count, tri_order, points):
    n = points.shape[0]
    dist = np.full(n, np.inf)
    best = np.full(n, -1, dtype=np.int64)
    closest = np.zeros((n, 3))
    stack = np.empty(128, dtype=np.int64)
    for i in range(n):
        p = points[i]
        bd2 = np.inf
        sp = 0
        stack[sp] = 0
        sp += 1
        while sp > 0:
            sp -= 1
            node = stack[sp]
            if _box_dist2(node_lo[node], node_hi[node], p) >= bd2:
                continue
            c = node_count[node]
            if c > 0:
                s0 = node_start[node]
                for k in range(s0, s0 + c):
                    tri = tri_order[k]
                    q = _closest_on_tri(p, va[tri], vb[tri], vc[tri])
                    d2 = (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 + (p[2] - q[2]) ** 2
                    if d2 < bd2:
                        bd2 = d2
                        best[i] = tri
                        closest[i, 0] = q[0]
                        closest[i, 1] = q[1]
                        closest[i, 2] = q[2]
            else:
                l = node_left[node]
                r = node_right[node]
                dl = _box_dist2(node_lo[l], node_hi[l], p)
                dr = _box_dist2(node_lo[r], node_hi[r], p)
                # push the farther child first so the nearer one is popped next
                if dl < dr:
                    stack[sp] = r
                    stack[sp + 1] = l
                else:
                    stack[sp] = l
                    stack[sp + 1] = r
                sp += 2
        dist[i] = np.sqrt(bd2)
    return dist, best, closest


@njit(cache=True)
def build_bvh(tlo, thi, leaf_size):
    """Median-split BVH over padded triangle boxes; see ``wlab.bvh``."""
    n = tlo.shape[0]
    cap = 2 * n + 1
    lo = np.empty((cap, 3))
    hi = np.empty((cap, 3))
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    start = np.zeros(cap, dtype=np.int64)
    count = np.zeros(cap, dtype=np.int64)
    order = np.arange(n).astype(np.int64)
    cent = 0.5 * (tlo + thi)
    n_nodes = 1
    start[0] = 0
    count[0] = n
    stack = np.empty(cap, dtype=np.int64)
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        s = start[node]
        e = s + count[node]
        for k in range(3):
            lo[node, k] = np.inf
            hi[node, k] = -np.inf
        cmin = np.full(3, np.inf)
        cmax = np.full(3, -np.inf)
        for i in range(s, e):
            t = order[i]
            for k in range(3):
                if tlo[t, k] < lo[node, k]:
                    lo[node, k] = tlo[t, k]
                if thi[t, k] > hi[node, k]:
                    hi[node, k] = thi[t, k]
                if cent[t, k] < cmin[k]:
                    cmin[k] = cent[t, k]
                if cent[t, k] > cmax[k]:
                    cmax[k] = cent[t, k]
        if e - s <= leaf_size:
            continue
        axis = 0
        for k in range(1, 3):
            if cmax[k] - cmin[k] > cmax[axis] - cmin[axis]:
                axis = k
        idx = order[s:e].copy()
        keys = np.empty(e - s)
        for i in range(e - s):
            keys[i] = cent[idx[i], axis]
        perm = np.argsort(keys, kind="mergesort")
        for i in range(e - s):
            order[s + i] = idx[perm[i]]
        mid = (e - s) // 2
        l = n_nodes
        r = n_nodes + 1
        n_nodes += 2
        start[l] = s
        count[l] = mid
        start[r] = s + mid
        count[r] = e - s - mid
        left[node] = l
        right[node] = r
        count[node] = 0
        stack[sp] = l
        stack[sp + 1] = r
        sp += 2
    return (lo[:n_nodes].copy(), hi[:n_nodes].copy(), left[:n_nodes].copy(), right[:n_nodes].copy(),
            start[:n_nodes].copy(), count[:n_nodes].copy(), order)
