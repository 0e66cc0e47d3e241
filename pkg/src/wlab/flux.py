"""Flux of linear Weingarten surfaces, end masses and the balancing identity.

Orientation conventions used throughout:

* The Weingarten normal ``N`` is the unit normal with respect to which the
  mean curvature is positive. On a revolved profile (y, z, psi) it is
  N = (-cos psi e_r, sin psi); on cylinders and spheres it points inward.
* ``T = 2H Id - A`` with ``A`` the shape operator of ``N``.
* A compact cycle is a surface piece closed up by planar caps, all oriented
  consistently with ``N``. Along each cut the conormal ``nu`` is the unit
  tangent vector orthogonal to the cut that points into the surface piece.
  The identity checked by :func:`balancing_check` is

      sum over caps  int <Y, n_cap>  =  1/2 sum over cuts  int <Y, (2a Id + b T) nu>.

* For a single parallel the flux is the cap term minus the line term with the
  piece below the cut retained (cap normal -e3, conormal pointing down); this
  is the convention for positive ends and gives -pi * I, with I the profile
  first integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import MeshError, TriMesh, disk_cap, merge, revolve_samples, weld
from .profile import DEFAULT_TOL, ProfileCurve, ProfileState, integrate_profile, sphere_profile
from .weingarten import CMC, Linear, WeingartenError, solve_kappa1


class FluxError(ValueError):
    pass


class MismatchedBoundaryError(FluxError):
    pass


class MissingCurvatureError(FluxError):
    pass


class OpenCycleError(FluxError):
    pass


@dataclass(frozen=True)
class Parallel:
    """A horizontal circle of a revolved profile.

    ``orientation`` +1 retains the part below the circle (positive-end cut,
    downward conormal, cap normal -e3); -1 retains the part above.
    """

    y: float
    psi: float
    z: float = 0.0
    orientation: int = 1

    def __post_init__(self):
        if not self.y > 0:
            raise FluxError(f"parallel radius must be positive, got {self.y}")
        if self.orientation not in (1, -1):
            raise FluxError("orientation must be +1 or -1")


@dataclass(frozen=True)
class EndSpec:
    sign: int  # +1 positive end, -1 negative end
    R: float
    r: float
    b: float = 0.0
    H: float | None = None

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise FluxError("end sign must be +1 (positive) or -1 (negative)")
        if not (0 < self.r <= self.R * (1 + 1e-12)):
            raise FluxError(f"end radii need 0 < r <= R, got R={self.R}, r={self.r}")
        if self.b < 0:
            raise FluxError("relation constant b must be nonnegative")

    @classmethod
    def from_profile(cls, profile, sign=1):
        return cls(sign, profile.R, profile.r, profile.b)


@dataclass(eq=False)
class LoopData:
    """Closed curve on a surface with the data needed by the flux line term.

    ``points``, ``normals`` (Weingarten normal) and ``conormals`` have shape
    (n, 3); ``shape_operators`` has shape (n, 3, 3) and holds ``A`` acting on
    ambient vectors (zero along the normal).
    """

    points: np.ndarray
    normals: np.ndarray
    conormals: np.ndarray
    shape_operators: np.ndarray | None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.normals = np.asarray(self.normals, dtype=float)
        self.conormals = np.asarray(self.conormals, dtype=float)
        n = self.points.shape[0]
        if n < 3 or self.points.shape != (n, 3):
            raise FluxError("loop needs at least 3 points of shape (n, 3)")
        if self.normals.shape != (n, 3) or self.conormals.shape != (n, 3):
            raise FluxError("normals and conormals must match the points")
        if self.shape_operators is not None:
            self.shape_operators = np.asarray(self.shape_operators, dtype=float)
            if self.shape_operators.shape != (n, 3, 3):
                raise FluxError("shape operators must have shape (n, 3, 3)")

    def segment_weights(self):
        """Trapezoid weights: half the lengths of the two adjacent segments."""
        d = np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1)
        return 0.5 * (d + np.roll(d, 1))

    def operator_images(self, a, b):
        """(2a Id + b T) nu at every loop point."""
        if self.shape_operators is None:
            if b == 0:
                return 2.0 * a * self.conormals
            raise MissingCurvatureError("loop carries no shape-operator data")
        A = self.shape_operators
        trace = np.trace(A, axis1=1, axis2=2)  # = 2H
        Anu = np.einsum("nij,nj->ni", A, self.conormals)
        Tnu = trace[:, None] * self.conormals - Anu
        return 2.0 * a * self.conormals + b * Tnu


@dataclass(frozen=True)
class BalancingReport:
    cap_term: float
    line_term: float
    residual: float
    scale: float

    @property
    def relative(self):
        return self.residual / self.scale

    def to_dict(self):
        return {
            "cap_term": self.cap_term,
            "line_term": self.line_term,
            "residual": self.residual,
            "scale": self.scale,
            "relative": self.relative,
        }


@dataclass(eq=False)
class Cycle:
    """Surface piece plus caps, with the conormal data along every cut."""

    surface: TriMesh
    caps: list
    loops: list = field(default_factory=list)


# -- closed forms -----------------------------------------------------------

def flux_at_parallel(p: Parallel, a: float, b: float) -> float:
    """-pi (y^2 - 2 a y cos psi - b cos^2 psi), times the orientation sign."""
    c = math.cos(p.psi)
    return -p.orientation * math.pi * (p.y * p.y - 2.0 * a * p.y * c - b * c * c)


def mass_of_end(e: EndSpec) -> float:
    """pi (R r + b)."""
    return math.pi * (e.R * e.r + e.b)


def cmc_mass(r: float, H: float) -> float:
    """pi (r/H - r^2) for an embedded unduloid end with neck radius r."""
    if not (H > 0 and math.isfinite(H)):
        raise FluxError(f"cmc mass needs H > 0, got {H}")
    if not (0 < r < 1.0 / H):
        raise FluxError(f"cmc mass needs 0 < r < 1/H = {1.0 / H}, got r={r}")
    return math.pi * (r / H - r * r)


# -- loops on surfaces of revolution --------------------------------------

def _principal_frame(psi, theta):
    """Unit profile tangent, parallel tangent and Weingarten normal."""
    c, s = math.cos(psi), math.sin(psi)
    er = np.stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)], axis=1)
    et = np.stack([-np.sin(theta), np.cos(theta), np.zeros_like(theta)], axis=1)
    ez = np.array([0.0, 0.0, 1.0])
    Xs = s * er + c * ez
    N = -c * er + s * ez
    return Xs, et, N


def parallel_loop(p: Parallel, relation, n_theta: int, center=(0.0, 0.0)) -> LoopData:
    """Loop data at a parallel with analytic curvatures.

    The conormal is the profile tangent pointing down for orientation +1 and
    up for -1; the profile and parallel directions are principal, with
    curvatures kappa1 (from the relation) and kappa2 = cos psi / y.
    """
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    Xs, et, N = _principal_frame(p.psi, theta)
    pts = np.stack(
        [center[0] + p.y * np.cos(theta), center[1] + p.y * np.sin(theta), np.full(n_theta, p.z)], axis=1
    )
    k2 = math.cos(p.psi) / p.y
    k1 = solve_kappa1(relation, k2)
    A = k1 * np.einsum("ni,nj->nij", Xs, Xs) + k2 * np.einsum("ni,nj->nij", et, et)
    conormal = -p.orientation * Xs
    return LoopData(pts, N, conormal, A)


def parallel_cap(p: Parallel, n_theta: int, n_rings: int | None = None, center=(0.0, 0.0)) -> TriMesh:
    """Horizontal disk spanning the parallel, normal -e3 for orientation +1."""
    return disk_cap(p.y, p.z, n_theta, n_rings=n_rings, center=center, normal_up=p.orientation < 0)


def parallel_at(curve: ProfileCurve, s: float, orientation: int = 1) -> Parallel:
    st = curve.state_at(s)
    return Parallel(st.y, st.psi, st.z, orientation)


# -- quadrature -------------------------------------------------------------

def cap_integral(cap: TriMesh, Y=(0.0, 0.0, 1.0)) -> float:
    """Sum of <Y, n> area over triangles (area vectors follow the winding)."""
    return float(cap.area_vectors.sum(axis=0) @ np.asarray(Y, dtype=float))


def line_integral(loop: LoopData, a: float, b: float, Y=(0.0, 0.0, 1.0)) -> float:
    """Trapezoid quadrature of <Y, (2a Id + b T) nu> along the loop."""
    vals = loop.operator_images(a, b) @ np.asarray(Y, dtype=float)
    return float(np.sum(vals * loop.segment_weights()))


def _check_boundary(loop: LoopData, cap: TriMesh, rtol: float = 1e-6):
    loops = cap.boundary_loops or cap.find_boundary_loops()
    if len(loops) != 1:
        raise MismatchedBoundaryError(f"cap must have exactly one boundary loop, found {len(loops)}")
    rim = cap.vertices[loops[0]]
    scale = max(1e-300, float(np.ptp(loop.points, axis=0).max()))
    if rim.shape[0] != loop.points.shape[0]:
        raise MismatchedBoundaryError(
            f"cap rim has {rim.shape[0]} vertices but the loop has {loop.points.shape[0]}"
        )
    d = np.linalg.norm(rim[:, None, :] - loop.points[None, :, :], axis=2).min(axis=1)
    if d.max() > rtol * scale:
        raise MismatchedBoundaryError(f"cap rim deviates from the loop by {d.max():.3e}")


def flux_quadrature(loop: LoopData, cap: TriMesh, a: float, b: float, Y=(0.0, 0.0, 1.0)) -> float:
    """Cap term minus half the line term, both by quadrature."""
    _check_boundary(loop, cap)
    return cap_integral(cap, Y) - 0.5 * line_integral(loop, a, b, Y)


def operator_positivity(loop: LoopData, a: float, b: float) -> float:
    """Minimum over the loop of <nu, (2a Id + b T) nu>."""
    vals = np.einsum("ni,ni->n", loop.operator_images(a, b), loop.conormals)
    return float(vals.min())


def mesh_parallel_loop(mesh: TriMesh, z: float, relation, p: Parallel, rtol: float = 1e-9) -> LoopData:
    """Loop data at the mesh vertices lying on the parallel at height ``z``.

    Vertices are taken from the mesh itself (so quadrature sees the mesh
    discretization) and the curvature data is attached analytically.
    """
    v = mesh.vertices
    on = np.flatnonzero(np.abs(v[:, 2] - z) <= rtol * max(1.0, abs(z)))
    if on.size < 3:
        raise MismatchedBoundaryError(f"no mesh parallel at height {z}")
    cx, cy = v[on, 0].mean(), v[on, 1].mean()
    r = np.hypot(v[on, 0] - cx, v[on, 1] - cy)
    on = on[np.abs(r - p.y) <= 1e-6 * p.y]
    theta = np.arctan2(v[on, 1] - cy, v[on, 0] - cx)
    order = on[np.argsort(theta)]
    # analytic data evaluated at the actual angles of the mesh vertices
    Xs, et, N = _principal_frame(p.psi, np.sort(theta))
    k2 = math.cos(p.psi) / p.y
    k1 = solve_kappa1(relation, k2)
    A = k1 * np.einsum("ni,nj->nij", Xs, Xs) + k2 * np.einsum("ni,nj->nij", et, et)
    return LoopData(v[order], N, -p.orientation * Xs, A)


# -- balancing on compact cycles ---------------------------------------------

def balancing_check(cycle: Cycle, a: float, b: float, Y=(0.0, 0.0, 1.0), weld_tol: float = 1e-9) -> BalancingReport:
    """Both sides of the balancing identity on a closed cycle.

    The residual is |caps - line/2|; ``scale`` is the total cap area plus
    half the integral of |(2a Id + b T) nu| along the cuts, which stays
    positive when ``Y`` makes both sides vanish.
    """
    if not cycle.caps or not cycle.loops:
        raise OpenCycleError("a cycle needs at least one cap and one cut")
    closed = weld(merge(cycle.surface, *cycle.caps), weld_tol * max(1.0, cycle.surface.diameter()))
    if not closed.is_closed():
        raise OpenCycleError("surface and caps do not form a closed cycle")
    Y = np.asarray(Y, dtype=float)
    caps = sum(cap_integral(c, Y) for c in cycle.caps)
    line = sum(line_integral(l, a, b, Y) for l in cycle.loops)
    scale = sum(c.area() for c in cycle.caps)
    for l in cycle.loops:
        scale += 0.5 * float(np.sum(np.linalg.norm(l.operator_images(a, b), axis=1) * l.segment_weights()))
    return BalancingReport(caps, 0.5 * line, abs(caps - 0.5 * line), scale)


def _ab(relation):
    if isinstance(relation, (Linear, CMC)):
        return relation.ab
    raise WeingartenError("flux computations need a linear or cmc relation")


def tube_cycle(curve: ProfileCurve, s0: float, s1: float, n_theta: int, n_s: int | None = None) -> Cycle:
    """Revolved profile between arclengths s0 < s1 closed by horizontal disks.

    The profile must be a graph over the axis direction (cos psi > 0) at the
    cuts; the bottom cap then has normal +e3 and the top cap -e3, matching
    the inward Weingarten normal.
    """
    if not s1 > s0:
        raise FluxError("need s1 > s0")
    if n_s is None:
        n_s = max(16, int(math.ceil((s1 - s0) / (2 * math.pi * float(curve.y.max()) / n_theta))) + 1)
    ss = np.linspace(s0, s1, n_s)
    y, z, _ = curve.interpolate(ss)
    surface = revolve_samples(y, z, n_theta)
    bottom = Parallel(float(y[0]), curve.state_at(s0).psi, float(z[0]), orientation=-1)
    top = Parallel(float(y[-1]), curve.state_at(s1).psi, float(z[-1]), orientation=1)
    if math.cos(bottom.psi) <= 0 or math.cos(top.psi) <= 0:
        raise FluxError("cuts must be transverse to the axis with cos psi > 0")
    caps = [parallel_cap(bottom, n_theta), parallel_cap(top, n_theta)]
    loops = [parallel_loop(bottom, curve.relation, n_theta), parallel_loop(top, curve.relation, n_theta)]
    return Cycle(surface, caps, loops)


def sphere_cap_cycle(a: float, b: float, n_theta: int, tol: float = DEFAULT_TOL) -> Cycle:
    """Upper hemisphere of the Weingarten sphere closed by its equatorial disk."""
    curve = sphere_profile(a, b, tol=tol)
    k = int(np.argmax(curve.y))
    # equator: where psi crosses zero
    s_eq = _psi_zero(curve, k)
    top = curve.s[-1]
    n_s = max(16, int(math.ceil(0.25 * n_theta)) + 1)
    ss = np.linspace(s_eq, top, n_s)
    y, z, _ = curve.interpolate(ss)
    y[-1] = 0.0
    surface = revolve_samples(y, z, n_theta)
    eq = Parallel(float(y[0]), 0.0, float(z[0]), orientation=-1)
    cap = parallel_cap(eq, n_theta)
    loop = parallel_loop(eq, curve.relation, n_theta)
    return Cycle(surface, [cap], [loop])


def _psi_zero(curve: ProfileCurve, k: int) -> float:
    from scipy.optimize import brentq

    lo = max(0, k - 2)
    hi = min(len(curve) - 1, k + 2)
    f = lambda s: float(curve.interpolate([s])[2][0])
    return brentq(f, curve.s[lo], curve.s[hi], xtol=1e-15)
