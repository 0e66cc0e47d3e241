import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wlab.flux import (
    Cycle,
    EndSpec,
    FluxError,
    LoopData,
    MismatchedBoundaryError,
    MissingCurvatureError,
    OpenCycleError,
    Parallel,
    balancing_check,
    cap_integral,
    cmc_mass,
    flux_at_parallel,
    flux_quadrature,
    mass_of_end,
    mesh_parallel_loop,
    operator_positivity,
    parallel_at,
    parallel_cap,
    parallel_loop,
    sphere_cap_cycle,
    tube_cycle,
)
from wlab.profile import delaunay_family, revolve, sphere_profile
from wlab.weingarten import CMC, Linear

REL = Linear(1.0, 1.0)


def test_closed_form_examples():
    assert flux_at_parallel(Parallel(1.5, 0.0), 1, 1) == pytest.approx(1.75 * math.pi)
    assert flux_at_parallel(Parallel(0.5, 0.0), 1, 1) == pytest.approx(1.75 * math.pi)
    assert flux_at_parallel(Parallel(1.0, 0.0), 1, 1) == pytest.approx(2 * math.pi)
    assert flux_at_parallel(Parallel(1.5, 0.0, orientation=-1), 1, 1) == pytest.approx(-1.75 * math.pi)


def test_flux_is_constant_along_profile(unduloid):
    c = unduloid.curve
    vals = [flux_at_parallel(parallel_at(c, s), 1, 1) for s in np.linspace(0, c.s[-1], 50)]
    assert np.ptp(vals) < 1e-8
    assert vals[0] == pytest.approx(mass_of_end(EndSpec.from_profile(unduloid)), rel=1e-10)


@pytest.mark.parametrize("frac", [0.0, 0.5, 0.2, 0.8])
def test_quadrature_matches_closed_form(unduloid, frac):
    p = parallel_at(unduloid.curve, frac * unduloid.period)
    q = flux_quadrature(parallel_loop(p, REL, 512), parallel_cap(p, 512), 1, 1)
    assert abs(q / flux_at_parallel(p, 1, 1) - 1) < 1e-3


def test_homotopic_parallels_agree(unduloid):
    vals = []
    for s in np.linspace(0.1, unduloid.period - 0.1, 7):
        p = parallel_at(unduloid.curve, s)
        vals.append(flux_quadrature(parallel_loop(p, REL, 512), parallel_cap(p, 512), 1, 1))
    assert (max(vals) - min(vals)) / abs(np.mean(vals)) < 2e-3


def test_contractible_loop_has_zero_flux():
    c = sphere_profile(1, 1)
    p = parallel_at(c, c.s[-1] - 1e-3)
    assert p.y < 2e-3
    q = flux_quadrature(parallel_loop(p, REL, 64), parallel_cap(p, 64), 1, 1)
    assert abs(q) < 1e-5


def test_second_order_convergence(unduloid):
    p = parallel_at(unduloid.curve, 0.5 * unduloid.period)
    exact = flux_at_parallel(p, 1, 1)
    errs = [abs(flux_quadrature(parallel_loop(p, REL, n), parallel_cap(p, n), 1, 1) - exact) for n in (64, 128, 256, 512)]
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(ratios >= 3.5)


def test_mesh_loop_matches_analytic_loop(unduloid):
    ext = unduloid.extrema.of_kind("bulge")[0]
    mesh = revolve(unduloid.curve, 128, s_range=(0.0, 2 * ext.s), n_s=65)
    p = Parallel(ext.y, ext.psi, ext.z)
    ml = mesh_parallel_loop(mesh, ext.z, REL, p, rtol=1e-6)
    al = parallel_loop(p, REL, 128)
    assert ml.points.shape == al.points.shape
    cap = parallel_cap(p, 128)
    assert flux_quadrature(ml, cap, 1, 1) == pytest.approx(flux_quadrature(al, cap, 1, 1), rel=1e-9)


def test_operator_positivity(unduloid):
    for s in np.linspace(0, unduloid.period, 9):
        p = parallel_at(unduloid.curve, s)
        assert operator_positivity(parallel_loop(p, REL, 32), 1, 1) > 0


def test_mass_examples():
    assert mass_of_end(EndSpec(1, 1.5, 0.5, 1.0)) == pytest.approx(1.75 * math.pi)
    assert mass_of_end(EndSpec(1, 1.0, 1.0, 1.0)) == pytest.approx(2 * math.pi)
    with pytest.raises(FluxError):
        EndSpec(1, 0.5, 1.5, 1.0)
    with pytest.raises(FluxError):
        EndSpec(0, 1.5, 0.5, 1.0)


@given(a=st.floats(0.1, 5), frac=st.floats(0.01, 1.0), b=st.floats(0.0, 5))
def test_mass_bound(a, frac, b):
    r = frac * a
    R = 2 * a - r
    m = mass_of_end(EndSpec(1, R, r, b))
    assert R * r <= a * a * (1 + 1e-12)
    assert m < math.pi * (2 * a * a + b)


def test_cmc_mass_examples():
    assert cmc_mass(0.5, 0.5) == pytest.approx(0.75 * math.pi)
    assert cmc_mass(0.5, 0.5) == pytest.approx(math.pi * 1.5 * 0.5)
    H = 0.7
    assert cmc_mass(1 / (2 * H), H) == pytest.approx(math.pi / (4 * H * H))
    assert cmc_mass(1e-12, 1.0) < 1e-10
    for r, H in [(0.0, 1.0), (1.0, 1.0), (0.5, -1.0), (0.5, 0.0)]:
        with pytest.raises(FluxError):
            cmc_mass(r, H)


@given(a=st.floats(0.1, 10), frac=st.floats(0.01, 0.99))
def test_cmc_consistency(a, frac):
    r = frac * 2 * a
    if r >= 2 * a:
        return
    H = 1 / (2 * a)
    R = 2 * a - r
    assert abs(mass_of_end(EndSpec(1, max(R, r), min(R, r), 0.0)) - cmc_mass(r, H)) <= 1e-12 * max(1.0, math.pi * a * a) * 4


def test_cmc_profile_mass_matches_flux():
    p = delaunay_family(CMC(0.5), 0.3)
    assert flux_at_parallel(Parallel(p.R, 0.0), 1.0, 0.0) == pytest.approx(cmc_mass(0.3, 0.5), rel=1e-9)


def test_boundary_checks(unduloid):
    p = parallel_at(unduloid.curve, 0.0)
    loop = parallel_loop(p, REL, 64)
    with pytest.raises(MismatchedBoundaryError):
        flux_quadrature(loop, parallel_cap(p, 32), 1, 1)
    shifted = Parallel(p.y * 1.1, p.psi, p.z)
    with pytest.raises(MismatchedBoundaryError):
        flux_quadrature(loop, parallel_cap(shifted, 64), 1, 1)
    bare = LoopData(loop.points, loop.normals, loop.conormals, None)
    with pytest.raises(MissingCurvatureError):
        flux_quadrature(bare, parallel_cap(p, 64), 1, 1)
    # b = 0 needs no curvature data
    assert np.isfinite(flux_quadrature(bare, parallel_cap(p, 64), 1, 0))


@pytest.mark.parametrize("Y", [(0, 0, 1), (1, 0, 0)])
def test_balancing_between_bulges(unduloid, Y):
    b = unduloid.extrema.of_kind("bulge")[0].s
    # bulge of this period to bulge of the next one
    from wlab.profile import integrate_profile, ProfileState

    c = integrate_profile(ProfileState(0, 0.5, 0, 0), REL, 2 * unduloid.period)
    rep = balancing_check(tube_cycle(c, b, b + unduloid.period, 256), 1, 1, Y)
    assert rep.relative < 1e-3


@pytest.mark.parametrize("Y", [(0, 0, 1), (1, 0, 0), (0.3, -0.4, 0.8)])
def test_balancing_neck_to_bulge(unduloid, Y):
    b = unduloid.extrema.of_kind("bulge")[0].s
    rep = balancing_check(tube_cycle(unduloid.curve, 0.0, b, 256), 1, 1, Y)
    assert rep.relative < 1e-3
    assert rep.scale > 0


@pytest.mark.parametrize("Y", [(0, 0, 1), (1, 0, 0)])
def test_balancing_sphere(Y):
    rep = balancing_check(sphere_cap_cycle(1, 1, 256), 1, 1, Y)
    assert rep.relative < 1e-3


def test_sphere_sides_for_vertical_Y():
    a, b = 1.0, 1.0
    rho = a + math.sqrt(a * a + b)
    rep = balancing_check(sphere_cap_cycle(a, b, 512), a, b, (0, 0, 1))
    # equatorial disk area, and the line term 1/2 * 2 pi rho (2a + b kappa) with kappa = 1/rho
    assert rep.cap_term == pytest.approx(math.pi * rho * rho, rel=1e-4)
    assert rep.line_term == pytest.approx(math.pi * rho * (2 * a + b / rho), rel=1e-4)


def test_open_cycle_rejected(unduloid):
    cyc = tube_cycle(unduloid.curve, 0.0, 1.0, 32)
    with pytest.raises(OpenCycleError):
        balancing_check(Cycle(cyc.surface, cyc.caps[:1], cyc.loops[:1]), 1, 1)
    with pytest.raises(OpenCycleError):
        balancing_check(Cycle(cyc.surface, [], []), 1, 1)


def test_cap_integral_orientation():
    p = Parallel(1.0, 0.0, 0.0, orientation=1)
    assert cap_integral(parallel_cap(p, 64)) == pytest.approx(-math.pi * math.sin(math.pi / 32) * 32 / math.pi, rel=1e-12)
    p = Parallel(1.0, 0.0, 0.0, orientation=-1)
    assert cap_integral(parallel_cap(p, 64)) > 0


def test_parallel_validation():
    with pytest.raises(FluxError):
        Parallel(0.0, 0.0)
    with pytest.raises(FluxError):
        Parallel(1.0, 0.0, orientation=2)
