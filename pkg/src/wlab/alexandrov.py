"""Alexandrov functions, the moving-plane procedure and symmetry detection.

Planes are written ``<x - q, nu> = t``. A moving-plane scan in direction
``nu`` starts at the first-touch offset T = min <x, nu> over the surface and
advances t; the part of the surface behind the plane (<x, nu> <= t) is the
cap, and its mirror image through the plane must stay inside the enclosed
region while the cap remains a graph over the plane (outward normals with
<n, nu> < 0). The scan stops at the first t where either condition fails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import MeshError, OpenMeshError, TriMesh, mesh_from_rings
from .profile import ProfileCurve

EPS_TANGENT = 1e-6


class AlexandrovError(ValueError):
    pass


class SelfIntersectionError(AlexandrovError):
    pass


class NonManifoldHitError(AlexandrovError):
    pass


@dataclass(frozen=True)
class ScanPlane:
    base: tuple
    normal: tuple
    offset: float = 0.0

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        norm = float(np.linalg.norm(n))
        if not abs(norm - 1.0) < 1e-9:
            raise AlexandrovError(f"plane normal must be a unit vector, |nu| = {norm}")

    @property
    def nu(self):
        return np.asarray(self.normal, dtype=float)

    @property
    def q(self):
        return np.asarray(self.base, dtype=float)

    def level(self):
        """Offset of the plane written as <x, nu> = level."""
        return float(self.q @ self.nu + self.offset)

    def moved(self, t):
        return ScanPlane(self.base, self.normal, t)

    def distance_to(self, other: "ScanPlane"):
        """Difference of normals (up to sign) and of levels, as a pair."""
        s = 1.0 if self.nu @ other.nu >= 0 else -1.0
        return float(np.linalg.norm(self.nu - s * other.nu)), abs(self.level() - s * other.level())

    @classmethod
    def from_level(cls, nu, level):
        nu = np.asarray(nu, dtype=float)
        nu = nu / np.linalg.norm(nu)
        return cls(tuple(level * nu), tuple(nu), 0.0)


@dataclass
class AlphaTable:
    heights: np.ndarray
    alpha: np.ndarray
    plane: ScanPlane
    detail: list = field(default_factory=list)


@dataclass(frozen=True)
class ScanOutcome:
    stop_t: float
    contact: str  # "interior", "boundary", "graph-violation" or "none"
    contact_point: tuple | None
    first_touch: float
    nu: tuple

    @property
    def plane(self):
        return ScanPlane.from_level(self.nu, self.stop_t)

    def to_dict(self):
        return {
            "stop_t": self.stop_t,
            "contact": self.contact,
            "contact_point": None if self.contact_point is None else list(self.contact_point),
            "first_touch": self.first_touch,
            "nu": list(self.nu),
        }


@dataclass
class AlphaConvergenceReport:
    heights: np.ndarray
    errors: np.ndarray
    bounds: np.ndarray
    d: float

    @property
    def passed(self):
        return bool(np.all(np.isfinite(self.errors)) and np.all(self.errors <= self.bounds))

    @property
    def worst_ratio(self):
        return float(np.max(self.errors / self.bounds))


# -- analytic rotational surfaces ---------------------------------------------

@dataclass(eq=False)
class AnalyticRevolution:
    """Surface of revolution about a vertical axis, optionally perturbed.

    The radius at height z and angle theta is rho(z) + perturbation(theta, z);
    ``rho`` comes from a profile that is a graph over the axis (cos psi > 0).
    """

    curve: ProfileCurve
    center: tuple = (0.0, 0.0)
    perturbation: object = None

    def __post_init__(self):
        if np.any(np.diff(self.curve.z) <= 0):
            raise AlexandrovError("analytic revolution needs z strictly increasing along the profile")
        from scipy.interpolate import CubicHermiteSpline

        # r(z) via Hermite data dr/dz = tan psi
        self._rho = CubicHermiteSpline(self.curve.z, self.curve.y, np.tan(self.curve.psi))

    @property
    def z_range(self):
        return float(self.curve.z[0]), float(self.curve.z[-1])

    def radius(self, theta, z):
        r = self._rho(z)
        if self.perturbation is not None:
            r = r + self.perturbation(theta, z)
        return r

    def line_hits(self, origin, direction, n_samples=2048):
        """Hit parameters of a horizontal line, sorted descending, and tangency flags."""
        from scipy.optimize import brentq

        origin = np.asarray(origin, dtype=float)
        direction = np.asarray(direction, dtype=float)
        z = origin[2]
        lo, hi = self.z_range
        if not (lo <= z <= hi):
            return np.empty(0), np.empty(0, dtype=bool)
        cx, cy = self.center
        ox, oy = origin[0] - cx, origin[1] - cy
        dx, dy = direction[0], direction[1]
        rho = float(self._rho(z))
        if self.perturbation is None:
            # |o + l d| = rho
            bq = ox * dx + oy * dy
            cq = ox * ox + oy * oy - rho * rho
            disc = bq * bq - cq
            if disc < 0:
                return np.empty(0), np.empty(0, dtype=bool)
            root = math.sqrt(disc)
            ts = np.array([-bq + root, -bq - root])
            return ts, np.array([root <= EPS_TANGENT * rho] * 2)
        rmax = rho + 1.0 + abs(float(self.perturbation(0.0, z)))
        span = math.hypot(ox, oy) + 2 * rmax

        def F(l):
            x, y = ox + l * dx, oy + l * dy
            return math.hypot(x, y) - float(self.radius(math.atan2(y, x), z))

        ls = np.linspace(-span, span, n_samples)
        vals = np.array([F(l) for l in ls])
        roots = []
        for i in np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:])):
            roots.append(brentq(F, ls[i], ls[i + 1], xtol=1e-14))
        ts = np.sort(np.array(roots))[::-1]
        return ts, np.zeros(ts.size, dtype=bool)


def perturb_radially(mesh: TriMesh, fn, center=(0.0, 0.0)) -> TriMesh:
    """Move every vertex radially (about a vertical axis) by fn(theta, z)."""
    v = mesh.vertices.copy()
    x, y = v[:, 0] - center[0], v[:, 1] - center[1]
    r = np.hypot(x, y)
    th = np.arctan2(y, x)
    dr = fn(th, v[:, 2])
    nz = r > 0
    v[nz, 0] += dr[nz] * x[nz] / r[nz]
    v[nz, 1] += dr[nz] * y[nz] / r[nz]
    return TriMesh(v, mesh.triangles.copy(), [l.copy() for l in mesh.boundary_loops])


# -- Alexandrov functions ---------------------------------------------------

def _mesh_line_hits(mesh: TriMesh, origins, direction, back: float):
    """Unique hit parameters along lines origin + l * direction, sorted descending.

    Rays start at ``origin - back * direction`` so hits on either side of the
    plane are seen. Coincident hits from shared edges are merged.
    """
    origins = np.atleast_2d(origins)
    starts = origins - back * direction[None, :]
    hits = mesh.ray_cast(starts, direction, tmin=0.0, max_hits=64)
    scale = max(1.0, mesh.diameter())
    normals = mesh.face_normals
    out = []
    for i in range(len(origins)):
        k = min(int(hits.count[i]), hits.t.shape[1])
        if hits.count[i] > hits.t.shape[1]:
            raise NonManifoldHitError("too many hits along one line")
        ts = hits.t[i, :k] - back
        tris = hits.tri[i, :k]
        if k == 0:
            out.append((np.empty(0), np.empty(0, dtype=bool)))
            continue
        keep = np.ones(k, dtype=bool)
        keep[1:] = np.diff(ts) > 1e-9 * scale
        ts, tris = ts[keep], tris[keep]
        tangent = np.abs(normals[tris] @ direction) < EPS_TANGENT
        out.append((ts[::-1], tangent[::-1]))
    return out


def _alpha1_from_hits(ts, tangent):
    if ts.size == 0:
        return None
    if tangent[0] or ts.size == 1:
        return float(ts[0])
    return 0.5 * float(ts[0] + ts[1])


def alpha1(surface, plane: ScanPlane, p) -> float | None:
    """Chord-midpoint depth along the line p + R nu, measured from p.

    With hits t1 > t2 > ... along the line, returns (t1 + t2) / 2, or t1 when
    the line is tangent there (or meets the surface once). None on a miss.
    """
    p = np.asarray(p, dtype=float)
    nu = plane.nu
    if abs((p - plane.q) @ nu - plane.offset) > 1e-9 * max(1.0, float(np.abs(p).max())):
        raise AlexandrovError("p does not lie on the plane")
    if isinstance(surface, TriMesh):
        back = 2.0 * (surface.diameter() + float(np.abs(surface.vertices - p).max()))
        ts, tangent = _mesh_line_hits(surface, p, nu, back)[0]
    else:
        ts, tangent = surface.line_hits(p, nu)
    return _alpha1_from_hits(ts, tangent)


def _slice_points(surface, plane: ScanPlane, t: float, n_rays: int):
    """Points on the horizontal line (plane at height t), spanning the surface."""
    nu = plane.nu
    if abs(nu[2]) > 1e-12:
        raise AlexandrovError("alpha slices need a vertical plane (horizontal nu)")
    w = np.array([-nu[1], nu[0], 0.0])
    # a point of the plane at height t
    q = plane.q + plane.offset * nu
    q = q + (t - q[2]) * np.array([0.0, 0.0, 1.0])
    if isinstance(surface, TriMesh):
        proj = surface.vertices @ w
        lo, hi = float(proj.min()), float(proj.max())
    else:
        lo_z, hi_z = surface.z_range
        rmax = float(np.max(surface.curve.y)) * 1.5 + 1.0
        c = np.array([surface.center[0], surface.center[1], 0.0]) @ w
        lo, hi = c - rmax, c + rmax
    q0 = q - (q @ w) * w
    u = np.linspace(lo, hi, n_rays + 2)[1:-1]
    return q0[None, :] + u[:, None] * w[None, :]


def alpha(surface, plane: ScanPlane, t: float, n_rays: int = 256):
    """Supremum of alpha1 over ``n_rays`` points on the plane at height t.

    Returns None when no line at that height meets the surface.
    """
    pts = _slice_points(surface, plane, t, n_rays)
    if isinstance(surface, TriMesh):
        back = 2.0 * (surface.diameter() + float(np.abs(surface.vertices - pts.mean(axis=0)).max()))
        per_line = _mesh_line_hits(surface, pts, plane.nu, back)
    else:
        per_line = [surface.line_hits(p, plane.nu) for p in pts]
    vals = [v for v in (_alpha1_from_hits(ts, tg) for ts, tg in per_line) if v is not None]
    if not vals:
        return None
    return max(vals)


def alpha_table(surface, plane: ScanPlane, heights, n_rays: int = 256) -> AlphaTable:
    heights = np.asarray(heights, dtype=float)
    vals = []
    for t in heights:
        a = alpha(surface, plane, float(t), n_rays)
        vals.append(math.nan if a is None else a)
    return AlphaTable(heights, np.array(vals), plane)


def alpha_limit_check(surface, plane: ScanPlane, heights, d: float, envelope=None, n_rays: int = 256):
    """Compare alpha(t_k) with the limit d.

    ``envelope`` maps heights to the allowed error; by default a constant
    1e-3 (the exact rotational case).
    """
    heights = np.asarray(heights, dtype=float)
    if heights.size > 1 and np.any(np.diff(heights) <= 0):
        raise AlexandrovError("heights must be increasing")
    table = alpha_table(surface, plane, heights, n_rays)
    errs = np.abs(table.alpha - d)
    if envelope is None:
        bounds = np.full(heights.shape, 1e-3)
    else:
        bounds = np.asarray(envelope(heights), dtype=float)
    return AlphaConvergenceReport(heights, errs, bounds, float(d))


# -- reflection and scans ---------------------------------------------------

def reflect_points(points, plane: ScanPlane):
    nu = plane.nu
    level = plane.level()
    points = np.asarray(points, dtype=float)
    return points - 2.0 * ((points @ nu) - level)[..., None] * nu


def reflect_through_plane(mesh: TriMesh, plane: ScanPlane) -> TriMesh:
    """Householder reflection; winding is flipped so normals stay outward."""
    return TriMesh(
        reflect_points(mesh.vertices, plane),
        mesh.triangles[:, ::-1].copy(),
        [l[::-1].copy() for l in mesh.boundary_loops],
    )


def _validate_closed(mesh: TriMesh, check_embedded: bool):
    if not mesh.is_closed():
        raise OpenMeshError("moving-plane scans need a closed mesh")
    if check_embedded:
        found = mesh.self_intersections(max_report=1)
        if found:
            raise SelfIntersectionError(f"mesh is not embedded (edge of triangle pair {found[0]})")


def _graph_event(mesh: TriMesh, nu, eps_g: float):
    """Lowest level where an outward vertex normal turns to face +nu."""
    g = mesh.vertex_normals @ nu
    h = mesh.vertices @ nu
    uniq, _ = mesh.edges
    i, j = uniq[:, 0], uniq[:, 1]
    # orient each edge from the lower g to the higher g
    swap = g[i] > g[j]
    lo = np.where(swap, j, i)
    hi = np.where(swap, i, j)
    # vertices inside flat pieces parallel to nu (e.g. planar caps) are not
    # silhouette points: reflecting such a piece keeps it in its own plane
    gf = np.abs(mesh.face_normals @ nu)
    tilt = np.zeros(mesh.n_vertices)
    for c in range(3):
        np.maximum.at(tilt, mesh.triangles[:, c], gf)
    flat = tilt <= eps_g
    cross = (g[lo] <= 0.0) & (g[hi] > eps_g) & ~flat[lo]
    if not np.any(cross):
        return math.inf, None
    lo, hi = lo[cross], hi[cross]
    w = (0.0 - g[lo]) / (g[hi] - g[lo])
    levels = h[lo] + w * (h[hi] - h[lo])
    k = int(np.argmin(levels))
    pt = mesh.vertices[lo[k]] + w[k] * (mesh.vertices[hi[k]] - mesh.vertices[lo[k]])
    return float(levels[k]), pt


def _touch_event(mesh: TriMesh, nu, g_min: float):
    """Lowest level at which a reflected cap vertex leaves the enclosed region.

    A front-facing vertex v (outward normal against nu) reflected through the
    plane at level t lands at v + 2 (t - <v, nu>) nu, which stays inside until
    it reaches the first surface point along +nu: t_v = <v, nu> + s_hit / 2.
    """
    g = mesh.vertex_normals @ nu
    idx = np.flatnonzero(g < -g_min)
    if idx.size == 0:
        return math.inf, None
    scale = max(1.0, mesh.diameter())
    hits = mesh.ray_cast(mesh.vertices[idx], nu, tmin=1e-7 * scale, max_hits=4)
    s = hits.t[:, 0]
    ok = np.isfinite(s)
    if not np.any(ok):
        return math.inf, None
    idx, s = idx[ok], s[ok]
    tv = mesh.vertices[idx] @ nu + 0.5 * s
    k = int(np.argmin(tv))
    return float(tv[k]), mesh.vertices[idx[k]] + 0.5 * s[k] * nu


def _sweep_violation(mesh: TriMesh, nu, t: float, inside_tol: float, eps_g: float):
    h = mesh.vertices @ nu
    cap = np.flatnonzero(h < t)
    if cap.size == 0:
        return None
    g = mesh.vertex_normals[cap] @ nu
    bad = np.flatnonzero(g > eps_g)
    if bad.size:
        return "graph-violation", mesh.vertices[cap[bad[0]]]
    refl = mesh.vertices[cap] + 2.0 * (t - h[cap])[:, None] * nu[None, :]
    sd = mesh.signed_distance(refl)
    out = np.flatnonzero(sd < -inside_tol)
    if out.size:
        return "interior", refl[out[0]]
    return None


def moving_plane_scan(
    mesh: TriMesh,
    nu,
    step: float | None = None,
    tol: float = 1e-6,
    *,
    method: str = "events",
    g_min: float = 0.25,
    eps_g: float = 1e-3,
    check_embedded: bool = True,
) -> ScanOutcome:
    """Run the moving-plane procedure in direction ``nu``.

    ``method="events"`` computes the stopping level directly as the first of
    two events: a reflected cap vertex reaching the surface (interior
    contact) or a vertex normal turning past the plane (graph violation).
    ``method="sweep"`` advances the plane in steps of ``step`` (default
    extent/200), tests the reflected cap by signed distance and the graph
    condition on cap vertices, and bisects the first violating step to
    ``tol``; it is slower and serves as a cross-check.
    """
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)
    _validate_closed(mesh, check_embedded)
    h = mesh.vertices @ nu
    T = float(h.min())
    extent = float(h.max() - T)

    if method == "events":
        t_touch, p_touch = _touch_event(mesh, nu, g_min)
        t_graph, p_graph = _graph_event(mesh, nu, eps_g)
        if not (math.isfinite(t_touch) or math.isfinite(t_graph)):
            return ScanOutcome(float(h.max()), "none", None, T, tuple(nu))
        if t_touch <= t_graph:
            return ScanOutcome(t_touch, "interior", tuple(map(float, p_touch)), T, tuple(nu))
        return ScanOutcome(t_graph, "graph-violation", tuple(map(float, p_graph)), T, tuple(nu))

    if method != "sweep":
        raise AlexandrovError(f"unknown scan method {method!r}")
    if step is None:
        step = extent / 200.0
    inside_tol = 4.0 * mesh.sagitta() + 1e-12 * max(1.0, extent)
    prev = T
    t = T + step
    hit = None
    while t <= h.max() + step:
        hit = _sweep_violation(mesh, nu, t, inside_tol, eps_g)
        if hit is not None:
            break
        prev = t
        t += step
    if hit is None:
        return ScanOutcome(float(h.max()), "none", None, T, tuple(nu))
    lo, hi = prev, t
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        res = _sweep_violation(mesh, nu, mid, inside_tol, eps_g)
        if res is None:
            lo = mid
        else:
            hi, hit = mid, res
    return ScanOutcome(hi, hit[0], tuple(map(float, hit[1])), T, tuple(nu))


@dataclass(frozen=True)
class SymmetryResult:
    plane: ScanPlane | None
    forward: ScanOutcome
    backward: ScanOutcome
    hausdorff: float | None

    @property
    def found(self):
        return self.plane is not None


def reflection_hausdorff(mesh: TriMesh, plane: ScanPlane) -> float:
    """max over vertices of dist(reflected vertex, mesh).

    Reflection is an isometric involution, so this also bounds the distance
    from the mesh vertices to the reflected mesh.
    """
    d, _, _ = mesh.closest_points(reflect_points(mesh.vertices, plane))
    return float(d.max())


def alexandrov_symmetry(
    mesh: TriMesh, nu, tol: float = 1e-3, *, hausdorff_tol: float | None = None, check_embedded: bool = True, **scan_kw
) -> SymmetryResult:
    """Run scans along +nu and -nu; a common stopping plane is a symmetry candidate.

    The candidate is accepted if the two levels agree within ``tol`` and the
    mesh reflected through it lies within ``hausdorff_tol`` (default ``tol``)
    of itself.
    """
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)
    _validate_closed(mesh, check_embedded)
    fwd = moving_plane_scan(mesh, nu, check_embedded=False, **scan_kw)
    bwd = moving_plane_scan(mesh, -nu, check_embedded=False, **scan_kw)
    level_f = fwd.stop_t
    level_b = -bwd.stop_t
    if abs(level_f - level_b) > tol:
        return SymmetryResult(None, fwd, bwd, None)
    plane = ScanPlane.from_level(nu, 0.5 * (level_f + level_b))
    hd = reflection_hausdorff(mesh, plane)
    if hd > (tol if hausdorff_tol is None else hausdorff_tol):
        return SymmetryResult(None, fwd, bwd, hd)
    return SymmetryResult(plane, fwd, bwd, hd)


# -- test shapes ----------------------------------------------------------

def tilted_cylinder(rho: float, beta: float, height: float, n_theta: int = 128, n_z: int | None = None,
                    cap_rings: int | None = None) -> TriMesh:
    """Right circular cylinder of radius rho whose axis leans by beta in the xz-plane,
    cut by the horizontal planes z = +-height/2 (elliptic boundary curves) and capped.

    Points are (z tan beta + rho cos theta / cos beta, rho sin theta, z); the only
    mirror symmetry is the plane y = 0.
    """
    if not (0 <= beta < 0.5 * math.pi):
        raise AlexandrovError("tilt must lie in [0, pi/2)")
    if n_z is None:
        n_z = max(4, int(math.ceil(height / (2 * math.pi * rho / n_theta))) + 1)
    if cap_rings is None:
        cap_rings = max(2, n_theta // 8)
    th = 2.0 * math.pi * np.arange(n_theta) / n_theta
    tb = math.tan(beta)
    sx = rho / math.cos(beta)

    def ring(z, scale):
        return np.stack([z * tb + scale * sx * np.cos(th), scale * rho * np.sin(th), np.full(n_theta, z)], axis=1)

    z0, z1 = -0.5 * height, 0.5 * height
    rows = [ring(z0, k / cap_rings) for k in range(cap_rings)]
    rows += [ring(z, 1.0) for z in np.linspace(z0, z1, n_z)]
    rows += [ring(z1, k / cap_rings) for k in range(cap_rings - 1, -1, -1)]
    return mesh_from_rings(np.array(rows))
