"""End-mass balance, area inequalities, the positive-end count bound and loop parity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .flux import EndSpec, mass_of_end
from .mesh import TriMesh, merge, revolve_samples

INTEGER_SNAP = 1e-12


class BoundsError(ValueError):
    pass


class PointOnCurveError(BoundsError):
    pass


class RayIntersectsSurfaceError(BoundsError):
    pass


class TransversalityError(BoundsError):
    pass


class HalfspaceError(BoundsError):
    pass


# -- balance and verdicts ---------------------------------------------------

@dataclass(frozen=True)
class BalanceReport:
    disk_area: float
    positive_mass_sum: float
    negative_mass_sum: float
    balance: float
    verdict: str  # "inequality-holds", "inequality-violated" or "compact-forced"
    min_positive_ends: int | None

    def to_dict(self):
        return {
            "disk_area": self.disk_area,
            "positive_mass_sum": self.positive_mass_sum,
            "negative_mass_sum": self.negative_mass_sum,
            "balance": self.balance,
            "verdict": self.verdict,
            "min_positive_ends": self.min_positive_ends,
        }


def _mass_sums(ends):
    pos = math.fsum(mass_of_end(e) for e in ends if e.sign > 0)
    neg = math.fsum(mass_of_end(e) for e in ends if e.sign < 0)
    return pos, neg


def balance(ends) -> float:
    """Total mass of positive ends minus total mass of negative ends."""
    pos, neg = _mass_sums(ends)
    return pos - neg


def theorem_two_verdict(disk_area: float, ends, a: float | None = None) -> BalanceReport:
    """Classify a configuration of ends against the area inequalities.

    With balance B: B > 0 requires |D| <= B, B < 0 requires |D| >= -B, and
    B = 0 (to relative rounding) with ends present is flagged compact-forced.
    Without ends the balance is 0 and |D| <= 0 fails, so the verdict is
    inequality-violated. ``a`` (taken as (R + r)/2 of the first end when
    omitted) feeds the positive-end count for the disk of area |D|.
    """
    if not disk_area > 0:
        raise BoundsError(f"disk area must be positive, got {disk_area}")
    ends = list(ends)
    pos, neg = _mass_sums(ends)
    bal = pos - neg
    if ends and abs(bal) <= 1e-12 * (pos + neg):
        verdict = "compact-forced"
        bal = 0.0
    elif bal >= 0:
        verdict = "inequality-holds" if disk_area <= bal else "inequality-violated"
    else:
        verdict = "inequality-holds" if disk_area >= -bal else "inequality-violated"
    n_min = None
    if ends:
        if a is None:
            a = 0.5 * (ends[0].R + ends[0].r)
        n_min = min_positive_ends(math.sqrt(disk_area / math.pi), a, ends[0].b)
    return BalanceReport(disk_area, pos, neg, bal, verdict, n_min)


def min_positive_ends(boundary_radius: float, a: float, b: float, sharp: bool = False) -> int:
    """Ceiling of r^2 / (2a^2 + b), or of r^2 / (a^2 + b) with ``sharp``.

    A quotient within relative 1e-12 of an integer is taken as that integer.
    """
    if boundary_radius < 0 or not a > 0 or b < 0:
        raise BoundsError(f"need r >= 0, a > 0, b >= 0; got r={boundary_radius}, a={a}, b={b}")
    denom = (a * a + b) if sharp else (2.0 * a * a + b)
    x = boundary_radius * boundary_radius / denom
    k = round(x)
    if abs(x - k) <= INTEGER_SNAP * max(1.0, x):
        return int(k)
    return int(math.ceil(x))


# -- winding numbers and parity -------------------------------------------------

@dataclass
class PlanarLoopSet:
    loops: list
    p: tuple

    def winding_numbers(self):
        return [winding_number(l, self.p) for l in self.loops]


def winding_number(loop, p, eps: float = 1e-12) -> int:
    """Signed number of turns of a closed polyline around p."""
    poly = np.ascontiguousarray(np.asarray(loop, dtype=float)[:, :2])
    if poly.shape[0] < 3:
        raise BoundsError("a loop needs at least 3 vertices")
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(p, dtype=float))[:, :2])
    scale = max(1.0, float(np.abs(poly).max()))
    wn, on = kernels.winding_numbers(poly, pts, eps * scale)
    if on[0]:
        raise PointOnCurveError(f"point {tuple(pts[0])} lies on the loop")
    return int(wn[0])


@dataclass(frozen=True)
class ParityResult:
    n_loops: int
    nonzero_count: int
    windings: tuple

    @property
    def passed(self):
        return self.nonzero_count % 2 == 0

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"


def _check_ray_clear(surface: TriMesh, ray):
    """``ray`` is (points, final_direction): a polyline followed by a half-line."""
    pts, final_dir = ray
    pts = np.asarray(pts, dtype=float)
    for a, b in zip(pts[:-1], pts[1:]):
        d = b - a
        L = float(np.linalg.norm(d))
        if L == 0:
            continue
        hits = surface.ray_cast(a[None, :], (d / L)[None, :], tmin=0.0, tmax=L, max_hits=1)
        if hits.count[0]:
            raise RayIntersectsSurfaceError(f"ray segment from {tuple(a)} meets the surface")
    d = np.asarray(final_dir, dtype=float)
    hits = surface.ray_cast(pts[-1][None, :], (d / np.linalg.norm(d))[None, :], tmin=0.0, max_hits=1)
    if hits.count[0]:
        raise RayIntersectsSurfaceError("final half-line of the ray meets the surface")


def _check_transverse(surface: TriMesh, loops, min_angle: float):
    on_boundary = np.zeros(surface.n_vertices, dtype=bool)
    for l in loops:
        on_boundary[l] = True
    touching = on_boundary[surface.triangles].any(axis=1)
    nz = np.abs(surface.face_normals[touching, 2])
    if nz.size and nz.max() > math.cos(min_angle):
        raise TransversalityError(f"surface meets the plane at less than {min_angle} rad along its boundary")


def loop_parity_check(surface: TriMesh, ray, plane_tol: float = 1e-9, min_angle: float = 1e-6) -> ParityResult:
    """Count boundary loops winding around the ray's foot point p.

    ``surface`` must lie in z >= 0 with all of its boundary in z = 0; ``ray``
    is ``(points, direction)``, a polyline starting at p = points[0] on the
    plane and continuing to infinity along ``direction``. The ray must not
    meet the surface. Triangles touching the boundary must meet the plane at
    an angle of at least ``min_angle`` radians.
    """
    pts, _ = ray
    p = np.asarray(pts[0], dtype=float)
    scale = max(1.0, surface.diameter())
    if abs(p[2]) > plane_tol * scale:
        raise BoundsError("the ray must start on the plane z = 0")
    if surface.vertices[:, 2].min() < -plane_tol * scale:
        raise HalfspaceError("surface leaves the closed upper halfspace")
    loops = surface.boundary_loops or surface.find_boundary_loops()
    for l in loops:
        if np.abs(surface.vertices[l, 2]).max() > plane_tol * scale:
            raise HalfspaceError("a boundary loop is not contained in the plane z = 0")
    _check_transverse(surface, loops, min_angle)
    _check_ray_clear(surface, ray)
    w = tuple(winding_number(surface.vertices[l], p[:2]) for l in loops)
    return ParityResult(len(loops), sum(1 for x in w if x != 0), w)


# -- randomized construction harness -------------------------------------------------

@dataclass(frozen=True)
class Component:
    kind: str  # "arch" (two boundary circles) or "dome" (one)
    center: tuple
    r_in: float
    r_out: float

    @property
    def height(self):
        return 0.5 * (self.r_out - self.r_in) if self.kind == "arch" else self.r_out

    def mesh(self, n_theta: int = 32, n_s: int = 12) -> TriMesh:
        if self.kind == "arch":
            m = 0.5 * (self.r_in + self.r_out)
            h = 0.5 * (self.r_out - self.r_in)
            phi = np.linspace(math.pi, 0.0, n_s)  # inner foot, over the top, outer foot
            y = m + h * np.cos(phi)
            z = h * np.sin(phi)
        else:
            phi = np.linspace(0.0, 0.5 * math.pi, n_s)  # pole down to the rim
            y = self.r_out * np.sin(phi)
            z = self.r_out * np.cos(phi)
        z[[0, -1] if self.kind == "arch" else [-1]] = 0.0
        mesh = revolve_samples(y, z, n_theta, center=self.center)
        mesh.boundary_loops = mesh.find_boundary_loops()
        return mesh

    def footprint_within(self, other: "Component") -> bool:
        """True if self sits inside other's hole (arch) or under other (dome)."""
        dist = math.dist(self.center, other.center)
        reach = dist + self.r_out
        if other.kind == "arch":
            return reach < other.r_in
        if reach >= other.r_out:
            return False
        return self.height < math.sqrt(other.r_out ** 2 - reach ** 2)


def _compatible(c1: Component, c2: Component) -> bool:
    if math.dist(c1.center, c2.center) > c1.r_out + c2.r_out:
        return True
    if c1.kind == "arch" and math.dist(c1.center, c2.center) < c1.r_in - c2.r_out:
        return True
    return c1.footprint_within(c2) or c2.footprint_within(c1)


@dataclass
class ParityTrial:
    seed: int
    index: int
    components: list
    ray_kind: str
    result: ParityResult

    def row(self):
        return (self.seed, self.index, self.result.n_loops, self.result.nonzero_count, self.result.verdict)


@dataclass
class ParityHarnessReport:
    trials: list = field(default_factory=list)
    rejected: int = 0

    @property
    def all_passed(self):
        return all(t.result.passed for t in self.trials)

    def counts(self):
        return sorted({t.result.nonzero_count for t in self.trials})


def _random_configuration(rng):
    comps = []
    n = int(rng.integers(1, 5))
    attempts = 0
    while len(comps) < n and attempts < 50:
        attempts += 1
        kind = "arch" if rng.random() < 0.65 else "dome"
        # centres near the origin so holes often contain the ray foot
        center = tuple(float(v) for v in rng.normal(0.0, 0.8, size=2))
        if kind == "arch":
            r_in = float(rng.uniform(0.3, 3.0))
            r_out = r_in + float(rng.uniform(0.2, 1.5))
        else:
            r_in = 0.0
            r_out = float(rng.uniform(0.2, 1.5))
        c = Component(kind, center, r_in, r_out)
        if all(_compatible(c, o) for o in comps):
            comps.append(c)
    return comps


def _random_ray(rng, comps):
    p = np.array([*rng.normal(0.0, 0.5, size=2), 0.0])
    top = max(c.height for c in comps) + 1.0
    kind = ("vertical", "up-then-horizontal", "slanted")[int(rng.integers(0, 3))]
    if kind == "vertical":
        return kind, ([p], (0.0, 0.0, 1.0))
    if kind == "up-then-horizontal":
        ang = float(rng.uniform(0, 2 * math.pi))
        return kind, ([p, p + np.array([0.0, 0.0, top])], (math.cos(ang), math.sin(ang), 0.0))
    ang = float(rng.uniform(0, 2 * math.pi))
    tilt = float(rng.uniform(0.0, 0.8))
    return kind, ([p], (tilt * math.cos(ang), tilt * math.sin(ang), 1.0))


def parity_trial(seed: int, index: int, n_theta: int = 32, max_attempts: int = 200) -> ParityTrial | None:
    """One valid randomized configuration, reproducible from (seed, index)."""
    rng = np.random.default_rng([seed, index])
    for _ in range(max_attempts):
        comps = _random_configuration(rng)
        surface = merge(*(c.mesh(n_theta) for c in comps))
        kind, ray = _random_ray(rng, comps)
        try:
            res = loop_parity_check(surface, ray)
        except (RayIntersectsSurfaceError, PointOnCurveError):
            continue
        return ParityTrial(seed, index, comps, kind, res)
    return None


def parity_harness(n_trials: int, seed: int = 0, n_theta: int = 32, workers: int = 1) -> ParityHarnessReport:
    """Randomized loop-parity trials; results are ordered by trial index."""
    idx = range(n_trials)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as ex:
            trials = list(ex.map(lambda i: parity_trial(seed, i, n_theta), idx))
    else:
        trials = [parity_trial(seed, i, n_theta) for i in idx]
    report = ParityHarnessReport()
    for t in trials:
        if t is None:
            report.rejected += 1
        else:
            report.trials.append(t)
    return report
