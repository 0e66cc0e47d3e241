"""Pure-numpy implementations of the hot kernels.

These ignore the BVH and test every ray against every triangle in chunks, so
they are meant for small meshes and for cross-checking the compiled path.
"""
import numpy as np

from . import _scalar

BARY_EPS = 1e-12
EDGE_EPS = 1e-9
PARALLEL_EPS = 1e-10  # |cos| between ray and triangle normal

linear_rhs = _scalar.linear_rhs
dp45_linear_step = _scalar.dp45_linear_step


def _ray_chunk(v0, e1, e2, o, d, tmin, tmax):
    # o, d: (r, 3); triangles broadcast along axis 1
    p = np.cross(d[:, None, :], e2[None, :, :])
    det = np.einsum("tk,rtk->rt", e1, p)
    scale = np.linalg.norm(np.cross(e1, e2), axis=1)[None, :] * np.linalg.norm(d, axis=1)[:, None]
    ok = np.abs(det) > PARALLEL_EPS * scale
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tv = o[:, None, :] - v0[None, :, :]
    u = np.einsum("rtk,rtk->rt", tv, p) * inv
    q = np.cross(tv, e1[None, :, :])
    v = np.einsum("rk,rtk->rt", d, q) * inv
    t = np.einsum("tk,rtk->rt", e2, q) * inv
    w = 1.0 - u - v
    ok &= (u >= -BARY_EPS) & (u <= 1.0 + BARY_EPS) & (v >= -BARY_EPS) & (u + v <= 1.0 + BARY_EPS)
    ok &= (t >= tmin) & (t <= tmax)
    edge = np.minimum(np.minimum(u, v), w) < EDGE_EPS
    return np.where(ok, t, np.inf), edge


def ray_hits(v0, e1, e2, node_lo, node_hi, node_left, node_right, node_start,
             node_count, tri_order, origins, dirs, tmin, tmax, max_hits):
    n = origins.shape[0]
    n_tri = v0.shape[0]
    hit_t = np.full((n, max_hits), np.inf)
    hit_tri = np.full((n, max_hits), -1, dtype=np.int64)
    hit_edge = np.zeros((n, max_hits), dtype=bool)
    n_hits = np.zeros(n, dtype=np.int64)
    chunk = max(1, 2_000_000 // max(n_tri, 1))
    for start in range(0, n, chunk):
        sl = slice(start, min(n, start + chunk))
        t, edge = _ray_chunk(v0, e1, e2, origins[sl], dirs[sl], tmin, tmax)
        n_hits[sl] = np.isfinite(t).sum(axis=1)
        k = min(max_hits, n_tri)
        order = np.argsort(t, axis=1, kind="stable")[:, :k]
        rows = np.arange(t.shape[0])[:, None]
        ts = t[rows, order]
        hit_t[sl, :k] = ts
        hit_tri[sl, :k] = np.where(np.isfinite(ts), order, -1)
        hit_edge[sl, :k] = np.where(np.isfinite(ts), edge[rows, order], False)
    return hit_t, hit_tri, hit_edge, n_hits


def winding_numbers(poly, pts, eps):
    x0 = poly[:, 0][None, :]
    y0 = poly[:, 1][None, :]
    x1 = np.roll(poly[:, 0], -1)[None, :]
    y1 = np.roll(poly[:, 1], -1)[None, :]
    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    cr = (x1 - x0) * (py - y0) - (px - x0) * (y1 - y0)
    up = (y0 <= py) & (y1 > py) & (cr > 0)
    down = (y0 > py) & (y1 <= py) & (cr < 0)
    wn = up.sum(axis=1).astype(np.int64) - down.sum(axis=1).astype(np.int64)
    ex = x1 - x0
    ey = y1 - y0
    seg2 = ex * ex + ey * ey
    dot = (px - x0) * ex + (py - y0) * ey
    slack = eps * np.sqrt(seg2)
    on = (cr * cr <= eps * eps * seg2) & (dot >= -slack) & (dot <= seg2 + slack)
    return wn, on.any(axis=1)


def _closest_on_tris(p, a, b, c):
    # vectorised Ericson closest point; p, a, b, c: (m, 3)
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = 1.0 / (va + vb + vc)
        out = a + ab * (vb * denom)[:, None] + ac * (vc * denom)[:, None]
        bc_w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        m = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
        out = np.where(m[:, None], b + bc_w[:, None] * (c - b), out)
        m = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
        out = np.where(m[:, None], a + (d2 / (d2 - d6))[:, None] * ac, out)
        m = (d6 >= 0) & (d5 <= d6)
        out = np.where(m[:, None], c, out)
        m = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
        out = np.where(m[:, None], a + (d1 / (d1 - d3))[:, None] * ab, out)
    m = (d3 >= 0) & (d4 <= d3)
    out = np.where(m[:, None], b, out)
    m = (d1 <= 0) & (d2 <= 0)
    out = np.where(m[:, None], a, out)
    return out


def nearest_triangle(va, vb, vc, node_lo, node_hi, node_left, node_right,
                     node_start, node_count, tri_order, points):
    n = points.shape[0]
    m = va.shape[0]
    dist = np.full(n, np.inf)
    best = np.full(n, -1, dtype=np.int64)
    closest = np.zeros((n, 3))
    chunk = max(1, 1_000_000 // max(m, 1))
    for start in range(0, n, chunk):
        pts = points[start:start + chunk]
        r = pts.shape[0]
        p = np.repeat(pts, m, axis=0)
        q = _closest_on_tris(p, np.tile(va, (r, 1)), np.tile(vb, (r, 1)), np.tile(vc, (r, 1)))
        d = np.linalg.norm(p - q, axis=1).reshape(r, m)
        j = np.argmin(d, axis=1)
        rows = np.arange(r)
        dist[start:start + r] = d[rows, j]
        best[start:start + r] = j
        closest[start:start + r] = q.reshape(r, m, 3)[rows, j]
    return dist, best, closest


def build_bvh(tlo, thi, leaf_size):
    """Median-split BVH over padded triangle boxes; see ``wlab.bvh``."""
    n = tlo.shape[0]
    cent = 0.5 * (tlo + thi)
    order = np.arange(n, dtype=np.int64)
    lo, hi, left, right, start, count = [], [], [], [], [], []

    def new_node(s, e):
        idx = order[s:e]
        lo.append(tlo[idx].min(axis=0))
        hi.append(thi[idx].max(axis=0))
        left.append(-1)
        right.append(-1)
        start.append(s)
        count.append(e - s)
        return len(lo) - 1

    stack = [new_node(0, n)]
    while stack:
        node = stack.pop()
        s = start[node]
        e = s + count[node]
        if e - s <= leaf_size:
            continue
        idx = order[s:e]
        c = cent[idx]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        mid = (e - s) // 2
        part = np.argpartition(c[:, axis], mid)
        order[s:e] = idx[part]
        l = new_node(s, s + mid)
        r = new_node(s + mid, e)
        left[node] = l
        right[node] = r
        count[node] = 0
        stack.append(l)
        stack.append(r)

    return (
        np.array(lo, dtype=float).reshape(-1, 3),
        np.array(hi, dtype=float).reshape(-1, 3),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(start, dtype=np.int64),
        np.array(count, dtype=np.int64),
        order,
    )
