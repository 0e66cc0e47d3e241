"""Generating curves of rotational Weingarten surfaces.

The profile is parametrised by arclength with state (y, z, psi): ``y`` is the
distance to the rotation axis, ``z`` the height and ``psi`` the angle between
the curve and the axis, so y' = sin psi and z' = cos psi. The principal
curvatures are kappa1 = -psi' (along the profile) and kappa2 = cos psi / y
(along the parallel); the Weingarten relation closes the system by giving
kappa1 in terms of kappa2.

For the linear class (and cmc, its b = 0 member) the quantity
y^2 - 2 a y cos psi - b cos^2 psi is a first integral; it is recorded per
sample so drift can be monitored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .mesh import DegenerateStripError, MeshError, TriMesh, revolve_samples
from .weingarten import CMC, GeneralElliptic, Linear, Relation, WeingartenError, f_at_zero, solve_kappa1

DEFAULT_TOL = 1e-11
EVENT_TOL = 1e-10
AXIS_FRACTION = 1e-8
NEAR_AXIS_FRACTION = 1e-3

_SAFETY = 0.9
_ALPHA = 0.7 / 5.0
_BETA = 0.4 / 5.0


class IntegrationError(RuntimeError):
    pass


class StepCollapseError(IntegrationError):
    pass


class AxisSingularityError(IntegrationError):
    pass


class SeriesStartError(IntegrationError):
    pass


@dataclass(frozen=True)
class ProfileState:
    s: float
    y: float
    z: float
    psi: float


@dataclass(frozen=True)
class Extremum:
    s: float
    y: float
    z: float
    psi: float
    kind: str  # "neck" or "bulge"


@dataclass
class Extrema:
    status: str  # "ok", "degenerate" (cylinder) or "none"
    events: list = field(default_factory=list)

    def of_kind(self, kind):
        return [e for e in self.events if e.kind == kind]


@dataclass(eq=False)
class ProfileCurve:
    """Dense samples of an integrated profile.

    Every sample carries the derivative (y', z', psi'), which gives cubic
    Hermite interpolation between samples.
    """

    relation: Relation
    s: np.ndarray
    y: np.ndarray
    z: np.ndarray
    psi: np.ndarray
    dy: np.ndarray
    dz: np.ndarray
    dpsi: np.ndarray
    first_integral_values: np.ndarray
    status: str = "complete"

    @property
    def samples(self):
        return [ProfileState(*v) for v in zip(self.s, self.y, self.z, self.psi)]

    def __len__(self):
        return self.s.size

    @property
    def length(self):
        return float(self.s[-1] - self.s[0])

    def first_integral_drift(self):
        I = self.first_integral_values
        return float(np.max(np.abs(I - I[0])))

    def interpolate(self, s_values):
        """Cubic Hermite values of (y, z, psi) at the requested arclengths."""
        s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
        k = np.clip(np.searchsorted(self.s, s_values, side="right") - 1, 0, self.s.size - 2)
        h = self.s[k + 1] - self.s[k]
        u = (s_values - self.s[k]) / h
        h00 = (1 + 2 * u) * (1 - u) ** 2
        h10 = u * (1 - u) ** 2
        h01 = u * u * (3 - 2 * u)
        h11 = u * u * (u - 1)
        out = []
        for x, dx in ((self.y, self.dy), (self.z, self.dz), (self.psi, self.dpsi)):
            out.append(h00 * x[k] + h10 * h * dx[k] + h01 * x[k + 1] + h11 * h * dx[k + 1])
        return tuple(out)

    def state_at(self, s):
        y, z, psi = self.interpolate([s])
        return ProfileState(float(s), float(y[0]), float(z[0]), float(psi[0]))


@dataclass(eq=False)
class DelaunayProfile:
    curve: ProfileCurve
    R: float
    r: float
    period: float
    I0: float
    extrema: Extrema

    @property
    def a(self):
        return self.curve.relation.ab[0]

    @property
    def b(self):
        return self.curve.relation.ab[1]

    @property
    def near_axis(self):
        """True when the neck is within NEAR_AXIS_FRACTION * a of the axis (football limit)."""
        return self.r <= NEAR_AXIS_FRACTION * self.a


# -- relation-specific pieces ---------------------------------------------

def _linear_ab(relation):
    if isinstance(relation, (Linear, CMC)):
        return relation.ab
    return None


def first_integral(state: ProfileState, a: float, b: float) -> float:
    """y^2 - 2 a y cos psi - b cos^2 psi."""
    c = math.cos(state.psi)
    return state.y * state.y - 2.0 * a * state.y * c - b * c * c


def profile_rhs(state: ProfileState, relation: Relation, y_min: float = 0.0):
    """(dy/ds, dz/ds, dpsi/ds) = (sin psi, cos psi, -kappa1)."""
    if not state.y > y_min:
        raise AxisSingularityError(f"radius {state.y} at or below the axis threshold {y_min}")
    kappa2 = math.cos(state.psi) / state.y
    kappa1 = solve_kappa1(relation, kappa2)
    return math.sin(state.psi), math.cos(state.psi), -kappa1


def _general_rhs(relation):
    def rhs(y, psi):
        c = math.cos(psi)
        return math.sin(psi), c, -solve_kappa1(relation, c / y)

    return rhs


def _make_stepper(relation):
    """Return (rhs, step) working on plain float tuples."""
    ab = _linear_ab(relation)
    if ab is not None:
        a, b = float(ab[0]), float(ab[1])
        lin_rhs = kernels.linear_rhs
        lin_step = kernels.dp45_linear_step

        def rhs(y, psi):
            return lin_rhs(y, psi, a, b)

        def step(y, z, psi, k, h):
            return lin_step(y, z, psi, k[0], k[1], k[2], h, a, b)

        return rhs, step

    from .kernels import _scalar as sc

    rhs = _general_rhs(relation)

    def step(y, z, psi, k, h):
        k1 = k
        k2 = rhs(y + h * sc.A21 * k1[0], psi + h * sc.A21 * k1[2])
        k3 = rhs(y + h * (sc.A31 * k1[0] + sc.A32 * k2[0]), psi + h * (sc.A31 * k1[2] + sc.A32 * k2[2]))
        k4 = rhs(
            y + h * (sc.A41 * k1[0] + sc.A42 * k2[0] + sc.A43 * k3[0]),
            psi + h * (sc.A41 * k1[2] + sc.A42 * k2[2] + sc.A43 * k3[2]),
        )
        k5 = rhs(
            y + h * (sc.A51 * k1[0] + sc.A52 * k2[0] + sc.A53 * k3[0] + sc.A54 * k4[0]),
            psi + h * (sc.A51 * k1[2] + sc.A52 * k2[2] + sc.A53 * k3[2] + sc.A54 * k4[2]),
        )
        k6 = rhs(
            y + h * (sc.A61 * k1[0] + sc.A62 * k2[0] + sc.A63 * k3[0] + sc.A64 * k4[0] + sc.A65 * k5[0]),
            psi + h * (sc.A61 * k1[2] + sc.A62 * k2[2] + sc.A63 * k3[2] + sc.A64 * k4[2] + sc.A65 * k5[2]),
        )
        new = []
        for i, x0 in enumerate((y, z, psi)):
            new.append(x0 + h * (sc.B1 * k1[i] + sc.B3 * k3[i] + sc.B4 * k4[i] + sc.B5 * k5[i] + sc.B6 * k6[i]))
        k7 = rhs(new[0], new[2])
        err = [
            h * (sc.E1 * k1[i] + sc.E3 * k3[i] + sc.E4 * k4[i] + sc.E5 * k5[i] + sc.E6 * k6[i] + sc.E7 * k7[i])
            for i in range(3)
        ]
        return new[0], new[1], new[2], err[0], err[1], err[2], k7[0], k7[1], k7[2]

    return rhs, step


def _bisect_in_step(step, x0, k0, h, g, tol):
    """Fraction theta of the step where g changes sign, via re-stepping from x0."""
    lo, hi = 0.0, 1.0
    glo = g(x0)
    best = None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        out = step(x0[0], x0[1], x0[2], k0, mid * h)
        xm = out[:3]
        gm = g(xm)
        best = (mid, xm, out[6:9])
        if abs(gm) < tol or (hi - lo) < 1e-15:
            break
        if (gm < 0.0) == (glo < 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
    return best


# -- integrator -----------------------------------------------------------

def integrate_profile(
    initial: ProfileState,
    relation: Relation,
    s_max: float,
    tol: float = DEFAULT_TOL,
    *,
    y_min: float | None = None,
    max_sign_changes: int | None = None,
    h0: float | None = None,
    max_steps: int = 2_000_000,
) -> ProfileCurve:
    """Adaptive Dormand-Prince 5(4) integration of the profile ODE.

    Steps are accepted when the embedded error is below ``tol * (1 + |x|)``
    componentwise; step sizes follow a PI controller. Integration ends at
    ``s_max`` (status "complete"), when the radius drops below ``y_min``
    (status "axis", the football limit) or after ``max_sign_changes`` sign
    changes of sin psi (status "event"); terminal events are located by
    bisection on a re-taken step.
    """
    ab = _linear_ab(relation)
    scale = ab[0] if ab is not None else max(initial.y, 1.0 / max(abs(f_at_zero(relation)), 1e-12))
    if y_min is None:
        y_min = AXIS_FRACTION * scale
    if not initial.y > y_min:
        raise AxisSingularityError(f"initial radius {initial.y} is not above the axis threshold {y_min}")
    if not s_max > initial.s:
        raise IntegrationError("s_max must exceed the initial arclength")
    rhs, step = _make_stepper(relation)

    s = float(initial.s)
    x = (float(initial.y), float(initial.z), float(initial.psi))
    k = rhs(x[0], x[2])
    if not all(math.isfinite(v) for v in k):
        raise IntegrationError(f"right-hand side not finite at the initial state {initial}")
    S, Y, Z, P, DY, DZ, DP = [s], [x[0]], [x[1]], [x[2]], [k[0]], [k[1]], [k[2]]

    h = h0 if h0 is not None else min(0.01 * scale, s_max - s)
    err_prev = 1e-4
    status = "complete"
    last_sign = 0
    sin0 = math.sin(x[2])
    if abs(sin0) > EVENT_TOL:
        last_sign = 1 if sin0 > 0 else -1
    changes = 0

    for _ in range(max_steps):
        if s >= s_max:
            break
        h = min(h, s_max - s)
        out = step(x[0], x[1], x[2], k, h)
        xn = out[:3]
        e = out[3:6]
        if not all(math.isfinite(v) for v in out):
            err = math.inf
        else:
            err = max(abs(e[i]) / (tol * (1.0 + max(abs(x[i]), abs(xn[i])))) for i in range(3))
        if err > 1.0:
            fac = 0.2 if not math.isfinite(err) else max(0.2, _SAFETY * err ** (-1.0 / 5.0))
            h *= fac
            if h < 1e-14 * (1.0 + abs(s)):
                raise StepCollapseError(f"step size collapsed at s={s}, state={x}")
            continue

        kn = out[6:9]
        sn = s + h if s + h < s_max or s_max - (s + h) > 0 else s_max

        # terminal: approach to the axis
        if xn[0] < y_min:
            theta, xe, ke = _bisect_in_step(step, x, k, h, lambda v: v[0] - y_min, 1e-3 * y_min)
            S.append(s + theta * h), Y.append(xe[0]), Z.append(xe[1]), P.append(xe[2])
            DY.append(ke[0]), DZ.append(ke[1]), DP.append(ke[2])
            status = "axis"
            break

        # sign changes of sin psi (necks and bulges)
        sn_val = math.sin(xn[2])
        new_sign = 0 if abs(sn_val) <= EVENT_TOL else (1 if sn_val > 0 else -1)
        if new_sign != 0 and last_sign != 0 and new_sign != last_sign:
            changes += 1
            if max_sign_changes is not None and changes >= max_sign_changes:
                theta, xe, ke = _bisect_in_step(step, x, k, h, lambda v: math.sin(v[2]), EVENT_TOL)
                S.append(s + theta * h), Y.append(xe[0]), Z.append(xe[1]), P.append(xe[2])
                DY.append(ke[0]), DZ.append(ke[1]), DP.append(ke[2])
                status = "event"
                break
        if new_sign != 0:
            last_sign = new_sign

        s, x, k = sn, xn, kn
        S.append(s), Y.append(x[0]), Z.append(x[1]), P.append(x[2])
        DY.append(k[0]), DZ.append(k[1]), DP.append(k[2])

        fac = _SAFETY * max(err, 1e-10) ** (-_ALPHA) * err_prev ** _BETA
        h *= min(5.0, max(0.2, fac))
        err_prev = max(err, 1e-4)
    else:
        raise IntegrationError(f"max_steps={max_steps} exhausted at s={s}")

    arrs = [np.array(v) for v in (S, Y, Z, P, DY, DZ, DP)]
    if ab is not None:
        c = np.cos(arrs[3])
        I = arrs[1] ** 2 - 2.0 * ab[0] * arrs[1] * c - ab[1] * c * c
    else:
        I = np.full(arrs[0].shape, np.nan)
    return ProfileCurve(relation, *arrs, I, status=status)


# -- extrema --------------------------------------------------------------

def _is_cylinder(curve):
    span = float(np.ptp(curve.y))
    return span <= 1e-9 * max(1.0, float(np.abs(curve.y).max())) and float(np.abs(np.sin(curve.psi)).max()) <= EVENT_TOL


def detect_extrema(curve: ProfileCurve) -> Extrema:
    """Necks (radius minima) and bulges (maxima) where sin psi vanishes."""
    if _is_cylinder(curve):
        return Extrema("degenerate", [])
    rhs, step = _make_stepper(curve.relation)
    sinp = np.sin(curve.psi)
    events = []

    def classify(y, z, psi, s):
        dpsi = rhs(y, psi)[2]
        # y'' = cos psi * psi'
        kind = "neck" if math.cos(psi) * dpsi > 0 else "bulge"
        return Extremum(float(s), float(y), float(z), float(psi), kind)

    n = len(curve)
    for i in range(n):
        if abs(sinp[i]) <= EVENT_TOL:
            if not events or abs(events[-1].s - curve.s[i]) > 1e-12 * (1 + abs(curve.s[i])):
                events.append(classify(curve.y[i], curve.z[i], curve.psi[i], curve.s[i]))
            continue
        if i + 1 < n and abs(sinp[i + 1]) > EVENT_TOL and (sinp[i] > 0) != (sinp[i + 1] > 0):
            x0 = (curve.y[i], curve.z[i], curve.psi[i])
            k0 = (curve.dy[i], curve.dz[i], curve.dpsi[i])
            h = curve.s[i + 1] - curve.s[i]
            theta, xe, _ = _bisect_in_step(step, x0, k0, h, lambda v: math.sin(v[2]), EVENT_TOL)
            events.append(classify(xe[0], xe[1], xe[2], curve.s[i] + theta * h))
    return Extrema("ok" if events else "none", events)


# -- families ---------------------------------------------------------------

def cylinder_period(a: float, b: float) -> float:
    """Period of small oscillations about the cylinder y = a: 2 pi sqrt(a^2 + b)."""
    return 2.0 * math.pi * math.sqrt(a * a + b)


def delaunay_family(relation: Relation, neck_r: float, tol: float = DEFAULT_TOL) -> DelaunayProfile:
    """One period (neck, bulge, neck) of the W-Delaunay surface with small radius ``neck_r``."""
    ab = _linear_ab(relation)
    if ab is None:
        raise WeingartenError("delaunay_family needs a linear or cmc relation")
    a, b = ab
    if not (0.0 < neck_r <= a * (1.0 + 1e-12)):
        raise WeingartenError(f"neck radius must lie in (0, a] = (0, {a}], got {neck_r}")
    start = ProfileState(0.0, float(min(neck_r, a)), 0.0, 0.0)
    I0 = first_integral(start, a, b)
    if abs(neck_r - a) <= 1e-12 * a:
        period = cylinder_period(a, b)
        curve = integrate_profile(start, relation, period, tol)
        return DelaunayProfile(curve, a, a, period, I0, Extrema("degenerate", []))
    s_max = 1e3 * (a + math.sqrt(a * a + b))
    curve = integrate_profile(start, relation, s_max, tol, max_sign_changes=2)
    if curve.status != "event":
        raise IntegrationError(f"no full period found (status {curve.status})")
    ext = detect_extrema(curve)
    bulges = ext.of_kind("bulge")
    if not bulges:
        raise IntegrationError("no bulge located within the period")
    return DelaunayProfile(curve, bulges[0].y, float(neck_r), float(curve.s[-1]), I0, ext)


def sphere_profile(a: float, b: float, eps: float | None = None, tol: float = DEFAULT_TOL) -> ProfileCurve:
    """Pole-to-pole profile of the round sphere of 2aH + bK = 1.

    The curve is started off the axis with the umbilic series
    y = s - k^2 s^3 / 6, z = k s^2 / 2, psi = pi/2 - k s, where k = f(0) is
    the sphere curvature, and stops when it returns to radius ``eps``.
    """
    if not (a > 0 and b >= 0):
        raise WeingartenError("sphere_profile needs a > 0 and b >= 0")
    relation = Linear(a, b) if b > 0 else CMC(1.0 / (2.0 * a))
    kappa = f_at_zero(relation)
    if eps is None:
        eps = 1e-4 / kappa
    if eps * kappa < 1e-7:
        raise SeriesStartError(f"series start eps={eps} is below the precision floor 1e-7/kappa")
    start = ProfileState(eps, eps - kappa * kappa * eps ** 3 / 6.0, 0.5 * kappa * eps * eps, 0.5 * math.pi - kappa * eps)
    return integrate_profile(start, relation, 4.0 * math.pi / kappa, tol, y_min=start.y * (1 - 1e-12))


def max_radius(curve: ProfileCurve) -> float:
    ext = detect_extrema(curve)
    bulges = ext.of_kind("bulge")
    if bulges:
        return max(e.y for e in bulges)
    return float(curve.y.max())


# -- meshing ----------------------------------------------------------------

def revolve(curve: ProfileCurve, n_theta: int = 64, s_range=None, n_s: int | None = None,
            caps: bool = False, cap_rings: int | None = None, center=(0.0, 0.0)) -> TriMesh:
    """Surface of revolution about the vertical axis through ``center``.

    The profile is resampled uniformly in arclength over ``s_range``. Open
    ends become boundary loops; with ``caps=True`` they are closed by planar
    disks, and ends that sit on the axis are collapsed to a pole. Triangles
    are wound so face normals point away from the axis on the side walls.
    """
    if n_theta < 8:
        raise MeshError(f"n_theta must be at least 8, got {n_theta}")
    s0, s1 = (curve.s[0], curve.s[-1]) if s_range is None else s_range
    s0 = max(s0, curve.s[0])
    s1 = min(s1, curve.s[-1])
    if n_s is None:
        ymax = float(curve.y.max())
        ds = 2.0 * math.pi * ymax / n_theta
        n_s = max(8, int(math.ceil((s1 - s0) / ds)) + 1)
    if not s1 > s0 or n_s < 2:
        raise DegenerateStripError(f"empty arclength range [{s0}, {s1}]")
    ss = np.linspace(s0, s1, n_s)
    y, z, _ = curve.interpolate(ss)
    if cap_rings is None:
        cap_rings = max(2, n_theta // 8)
    k = cap_rings if caps else 0
    ymax = float(np.abs(y).max())
    return revolve_samples(y, z, n_theta, center=center, cap_start=k, cap_end=k, pole_tol=2e-3 * ymax)
