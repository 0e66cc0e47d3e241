import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wlab.alexandrov import (
    AlexandrovError,
    AnalyticRevolution,
    ScanPlane,
    SelfIntersectionError,
    alexandrov_symmetry,
    alpha,
    alpha1,
    alpha_limit_check,
    alpha_table,
    moving_plane_scan,
    perturb_radially,
    reflect_points,
    reflect_through_plane,
    reflection_hausdorff,
    tilted_cylinder,
)
from wlab.mesh import OpenMeshError, TriMesh, icosphere_directions, merge, rotation_matrix
from wlab.profile import ProfileState, delaunay_family, integrate_profile, revolve, sphere_profile
from wlab.weingarten import Linear

PLANE_X = ScanPlane((-2.0, 0.0, 0.0), (1.0, 0.0, 0.0))  # x = -2, so d = 2 for the z-axis


@pytest.fixture(scope="module")
def cylinder_curve():
    return integrate_profile(ProfileState(0, 1.0, 0, 0), Linear(1, 1), 4.0)


@pytest.fixture(scope="module")
def sphere_mesh():
    # unit sphere centred at (0, 0, 1)
    return revolve(sphere_profile(0.5, 0.0), 128)


@pytest.fixture(scope="module")
def capped_period(unduloid):
    return revolve(unduloid.curve, 128, caps=True)


def test_scan_plane_requires_unit_normal():
    with pytest.raises(AlexandrovError):
        ScanPlane((0, 0, 0), (1, 1, 0))
    p = ScanPlane.from_level((0, 0, 2.0), 3.0)
    assert p.level() == pytest.approx(3.0)
    assert p.moved(1.0).level() == pytest.approx(4.0)


@pytest.mark.parametrize("h", [0.0, 0.3, -0.9])
def test_alpha1_cylinder(cylinder_curve, h):
    an = AnalyticRevolution(cylinder_curve)
    mesh = revolve(cylinder_curve, 256)
    p = np.array([-2.0, h, 1.5])
    assert alpha1(an, PLANE_X, p) == pytest.approx(2.0, abs=1e-12)
    assert alpha1(mesh, PLANE_X, p) == pytest.approx(2.0, abs=1e-9)


def test_alpha1_grazing_and_miss(cylinder_curve):
    an = AnalyticRevolution(cylinder_curve)
    assert alpha1(an, PLANE_X, (-2.0, 1.0, 1.0)) == pytest.approx(2.0, abs=1e-12)
    assert alpha1(an, PLANE_X, (-2.0, 1.5, 1.0)) is None
    mesh = revolve(cylinder_curve, 64)
    assert alpha1(mesh, PLANE_X, (-2.0, 1.5, 1.0)) is None
    with pytest.raises(AlexandrovError):
        alpha1(an, PLANE_X, (0.0, 0.0, 1.0))


def test_alpha1_sphere(sphere_mesh):
    for y, z in [(0.0, 1.0), (0.5, 1.2), (0.2, 0.4)]:
        assert alpha1(sphere_mesh, PLANE_X, (-2.0, y, z)) == pytest.approx(2.0, abs=1e-9)


def test_alpha_on_rotational_shapes(sphere_mesh, unduloid):
    for t in (0.3, 1.0, 1.7):
        assert alpha(sphere_mesh, PLANE_X, t) == pytest.approx(2.0, abs=1e-9)
    mesh = revolve(unduloid.curve, 256)
    for t in np.linspace(0.5, 8.0, 6):
        assert alpha(mesh, PLANE_X, t) == pytest.approx(2.0, abs=1e-3)
    assert alpha(sphere_mesh, PLANE_X, 5.0) is None


def test_alpha_table_marks_empty_slices(sphere_mesh):
    tab = alpha_table(sphere_mesh, PLANE_X, [1.0, 3.0])
    assert tab.alpha[0] == pytest.approx(2.0, abs=1e-9)
    assert math.isnan(tab.alpha[1])


def test_alpha_tilted_cylinder_varies():
    tc = tilted_cylinder(1.0, 0.4, 3.0, 128)
    vals = [alpha(tc, PLANE_X, t) for t in (-1.0, 0.0, 1.0)]
    # the axis drifts by z tan(beta) in the x direction
    assert np.allclose(vals, [2.0 + t * math.tan(0.4) for t in (-1.0, 0.0, 1.0)], atol=1e-6)
    assert vals[0] < vals[1] < vals[2]


def test_alpha_needs_vertical_plane(sphere_mesh):
    with pytest.raises(AlexandrovError):
        alpha(sphere_mesh, ScanPlane((0, 0, 0), (0, 0, 1.0)), 1.0)


def test_alpha_limit_exact_and_perturbed():
    c = integrate_profile(ProfileState(0, 0.5, 0, 0), Linear(1, 1), 3 * 8.885765876316732)
    heights = np.linspace(0.5, 6.0, 12)
    an = AnalyticRevolution(c)
    rep = alpha_limit_check(an, PLANE_X, heights, 2.0, n_rays=64)
    assert rep.passed and rep.errors.max() < 1e-9
    pert = AnalyticRevolution(c, perturbation=lambda th, z: 0.1 * np.exp(-z) * np.cos(th))
    rep = alpha_limit_check(pert, PLANE_X, heights, 2.0, envelope=lambda t: 0.2 * np.exp(-t), n_rays=64)
    assert rep.passed
    zero = AnalyticRevolution(c, perturbation=lambda th, z: 0.0 * th)
    assert np.allclose(alpha_table(zero, PLANE_X, heights, 64).alpha, alpha_table(an, PLANE_X, heights, 64).alpha, atol=1e-9)
    with pytest.raises(AlexandrovError):
        alpha_limit_check(an, PLANE_X, heights[::-1], 2.0)


def test_alpha_limit_mesh_zero_perturbation_is_identity(unduloid):
    mesh = revolve(unduloid.curve, 64)
    same = perturb_radially(mesh, lambda th, z: 0.0 * th)
    assert np.array_equal(same.vertices, mesh.vertices)


def test_reflection_properties(sphere_mesh):
    plane = ScanPlane((0.3, -0.2, 0.5), tuple(np.array([1.0, 2.0, -2.0]) / 3.0), 0.25)
    back = reflect_through_plane(reflect_through_plane(sphere_mesh, plane), plane)
    assert np.abs(back.vertices - sphere_mesh.vertices).max() <= 1e-15 * 8
    assert np.array_equal(back.triangles, sphere_mesh.triangles)
    r = reflect_through_plane(sphere_mesh, plane)
    assert np.allclose(r.areas, sphere_mesh.areas, rtol=1e-12)
    assert r.signed_volume() == pytest.approx(sphere_mesh.signed_volume(), rel=1e-12)
    assert np.allclose(r.centroid(), reflect_points(sphere_mesh.centroid(), plane), atol=1e-12)
    through_center = ScanPlane((0, 0, 1.0), (0, 0, 1.0))
    assert reflection_hausdorff(sphere_mesh, through_center) < 1e-6


@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_reflection_is_isometric(vals):
    n = np.array(vals[:3])
    if np.linalg.norm(n) < 1e-3:
        return
    plane = ScanPlane(tuple(vals[3:]), tuple(n / np.linalg.norm(n)), 0.1)
    pts = np.array([[0.0, 0, 0], [1, 2, 3], [-2, 0.5, 1]])
    r = reflect_points(pts, plane)
    d0 = np.linalg.norm(pts[:, None] - pts[None], axis=2)
    d1 = np.linalg.norm(r[:, None] - r[None], axis=2)
    assert np.allclose(d0, d1, atol=1e-12)
    assert np.allclose(reflect_points(r, plane), pts, atol=1e-12)


def test_scan_sphere_stops_at_center(sphere_mesh):
    out = moving_plane_scan(sphere_mesh, (0, 0, 1))
    assert out.stop_t == pytest.approx(1.0, abs=1e-3)
    assert out.first_touch == pytest.approx(0.0, abs=1e-6)
    assert out.stop_t >= out.first_touch
    assert out.contact in ("interior", "graph-violation")


def test_scan_capped_period_horizontal(capped_period):
    for nu in [(1, 0, 0), (0, -1, 0), (1 / math.sqrt(2), 1 / math.sqrt(2), 0)]:
        assert moving_plane_scan(capped_period, nu).stop_t == pytest.approx(0.0, abs=1e-3)


def test_two_spheres_stop_before_midplane():
    big = revolve(sphere_profile(0.5, 0.0), 128).transformed(translation=(0, 0, -1.0))
    small = revolve(sphere_profile(0.3, 0.0), 96).transformed(translation=(3.0, 0, -0.6))
    two = merge(big, small)
    mid = 1.5
    fwd = moving_plane_scan(two, (1, 0, 0))
    oracle = moving_plane_scan(two, (1, 0, 0), method="sweep", tol=1e-4)
    assert fwd.stop_t < mid and fwd.stop_t == pytest.approx(0.0, abs=1e-3)
    assert abs(fwd.stop_t - oracle.stop_t) < 5e-3
    bwd = moving_plane_scan(two, (-1, 0, 0))
    oracle = moving_plane_scan(two, (-1, 0, 0), method="sweep", tol=1e-4)
    assert -bwd.stop_t > mid and -bwd.stop_t == pytest.approx(3.0, abs=1e-3)
    assert abs(bwd.stop_t - oracle.stop_t) < 5e-3


def test_scan_refinement_converges(unduloid):
    # the sweep stops within a few sagittas of the axis plane; halving h halves the gap
    stops, sags = [], []
    for n in (24, 48, 96):
        m = revolve(unduloid.curve, n, caps=True)
        stops.append(moving_plane_scan(m, (1, 0, 0), method="sweep", tol=1e-5).stop_t)
        sags.append(m.sagitta())
    assert all(0 <= s <= 4 * g for s, g in zip(stops, sags))
    ratios = np.array(stops[:-1]) / np.array(stops[1:])
    assert np.all((ratios > 1.5) & (ratios < 2.6))


def test_scan_preconditions(unduloid):
    open_mesh = revolve(unduloid.curve, 32)
    with pytest.raises(OpenMeshError):
        moving_plane_scan(open_mesh, (1, 0, 0))
    s = revolve(sphere_profile(0.5, 0.0), 32)
    overlap = merge(s, s.transformed(translation=(0.5, 0.1, 0.05)))
    with pytest.raises(SelfIntersectionError):
        moving_plane_scan(overlap, (1, 0, 0))
    with pytest.raises(AlexandrovError):
        moving_plane_scan(s, (1, 0, 0), method="bogus")


def test_symmetry_axis_directions(sphere_mesh, capped_period):
    for nu in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
        res = alexandrov_symmetry(sphere_mesh, nu)
        assert res.found
        assert res.plane.level() == pytest.approx(nu[2] * 1.0, abs=1e-3)
    res = alexandrov_symmetry(capped_period, (0, 1, 0))
    assert res.found and abs(res.plane.level()) < 1e-3


def test_symmetry_equivariance(capped_period):
    R = rotation_matrix((0.3, -0.5, 0.8), 0.7)
    shift = np.array([0.4, -1.2, 2.5])
    moved = capped_period.transformed(R, shift)
    nu = np.array([1.0, 0.0, 0.0])
    base = alexandrov_symmetry(capped_period, nu)
    res = alexandrov_symmetry(moved, R @ nu)
    assert base.found and res.found
    expected = base.plane.level() + (R @ nu) @ shift
    assert res.plane.level() == pytest.approx(expected, abs=1e-3)


def test_tilted_cylinder_has_one_symmetry():
    tc = tilted_cylinder(1.0, 0.4, 3.0, 128)
    found = [tuple(np.round(nu, 6)) for nu in icosphere_directions() if alexandrov_symmetry(tc, nu).found]
    assert sorted(found) == [(0.0, -1.0, 0.0), (0.0, 1.0, 0.0)]
    # the untilted cylinder keeps its boundary's symmetries
    straight = tilted_cylinder(1.0, 0.0, 3.0, 128)
    for nu in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
        assert alexandrov_symmetry(straight, nu).found


def test_asymmetric_direction_reports_no_plane():
    tc = tilted_cylinder(1.0, 0.4, 3.0, 64)
    res = alexandrov_symmetry(tc, (1, 0, 0))
    assert not res.found and res.plane is None
