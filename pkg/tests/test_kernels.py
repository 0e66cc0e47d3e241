import os
import subprocess
import sys

import numpy as np
import pytest

from wlab.bvh import build_bvh
from wlab.kernels import _numba, _numpy
from wlab.mesh import revolve_samples


@pytest.fixture(scope="module")
def scene():
    phi = np.linspace(0, np.pi, 13)
    m = revolve_samples(np.sin(phi), -np.cos(phi), 16)
    rng = np.random.default_rng(1)
    o = np.ascontiguousarray(rng.uniform(-1.5, 1.5, (200, 3)))
    d = rng.normal(size=(200, 3))
    d = np.ascontiguousarray(d / np.linalg.norm(d, axis=1)[:, None])
    return m, o, d


def test_ray_hits_agree(scene):
    m, o, d = scene
    v0, e1, e2 = m._tri_arrays
    bvh = m.bvh.arrays
    for tmin, tmax in [(0.0, np.inf), (-np.inf, np.inf), (0.1, 1.0)]:
        a = _numba.ray_hits(v0, e1, e2, *bvh, o, d, tmin, tmax, 8)
        b = _numpy.ray_hits(v0, e1, e2, *bvh, o, d, tmin, tmax, 8)
        assert np.array_equal(a[3], b[3])
        assert np.allclose(a[0], b[0], atol=1e-12, equal_nan=False)
        fin = np.isfinite(a[0])
        assert np.array_equal(a[1][fin], b[1][fin])


def test_nearest_triangle_agrees(scene):
    m, o, _ = scene
    a, b, c = (np.ascontiguousarray(x) for x in m.corners)
    bvh = m.bvh.arrays
    d1, t1, p1 = _numba.nearest_triangle(a, b, c, *bvh, o)
    d2, t2, p2 = _numpy.nearest_triangle(a, b, c, *bvh, o)
    assert np.allclose(d1, d2, atol=1e-12)
    assert np.allclose(p1, p2, atol=1e-12)


def test_winding_agrees():
    th = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    poly = np.ascontiguousarray(np.c_[np.cos(th) * (1 + 0.3 * np.cos(3 * th)), np.sin(th)])
    pts = np.ascontiguousarray(np.random.default_rng(2).uniform(-1.5, 1.5, (500, 2)))
    w1, on1 = _numba.winding_numbers(poly, pts, 1e-12)
    w2, on2 = _numpy.winding_numbers(poly, pts, 1e-12)
    assert np.array_equal(w1, w2) and np.array_equal(on1, on2)


def test_dp45_step_agrees():
    d = _numpy.linear_rhs(0.5, 0.2, 1.0, 1.0)
    assert np.allclose(d, _numba.linear_rhs(0.5, 0.2, 1.0, 1.0), atol=1e-15)
    a = _numba.dp45_linear_step(0.5, 0.0, 0.2, *d, 0.05, 1.0, 1.0)
    b = _numpy.dp45_linear_step(0.5, 0.0, 0.2, *d, 0.05, 1.0, 1.0)
    assert np.allclose(np.hstack(a), np.hstack(b), atol=1e-15)


def test_build_bvh_agrees():
    rng = np.random.default_rng(3)
    tv = rng.normal(size=(300, 3, 3))
    tlo = np.ascontiguousarray(tv.min(axis=1))
    thi = np.ascontiguousarray(tv.max(axis=1))
    a = _numba.build_bvh(tlo, thi, 4)
    b = _numpy.build_bvh(tlo, thi, 4)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_numpy_backend_flag():
    code = (
        "import wlab; from wlab import Linear, delaunay_family;"
        "print(wlab.backend_name(), repr(delaunay_family(Linear(1, 1), 0.5).R))"
    )
    out = {}
    for flag in ("numpy", "numba"):
        env = dict(os.environ, WLAB_BACKEND=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        name, R = res.stdout.split()
        assert name == flag
        out[flag] = float(R)
    assert out["numpy"] == pytest.approx(out["numba"], abs=1e-12)
    assert out["numpy"] == pytest.approx(1.5, abs=1e-9)


def test_wrapper_bvh_matches_backend():
    rng = np.random.default_rng(4)
    tv = rng.normal(size=(50, 3, 3))
    assert build_bvh(tv).n_nodes >= 1
