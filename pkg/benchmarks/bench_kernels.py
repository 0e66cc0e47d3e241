"""Compare the numba and numpy kernel backends on representative workloads.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is called once
to trigger compilation, then timed as the best of ``--repeat`` runs.
"""
import argparse
import time

import numpy as np

from wlab.bvh import build_bvh as wrap_bvh
from wlab.kernels import _numba, _numpy
from wlab.profile import delaunay_family, revolve
from wlab.weingarten import Linear


def best_of(fn, repeat):
    fn()
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def workloads(n_theta, n_rays, n_points):
    mesh = revolve(delaunay_family(Linear(1.0, 1.0), 0.5).curve, n_theta, caps=True)
    v0, e1, e2 = mesh._tri_arrays
    tv = mesh.vertices[mesh.triangles]
    pad = 1e-12 * max(1.0, float(np.abs(tv).max()))
    tlo = np.ascontiguousarray(tv.min(axis=1) - pad)
    thi = np.ascontiguousarray(tv.max(axis=1) + pad)
    bvh = wrap_bvh(tv).arrays
    rng = np.random.default_rng(0)
    origins = np.ascontiguousarray(rng.uniform(-2, 2, (n_rays, 3)) + [0, 0, 4.3])
    dirs = rng.normal(size=(n_rays, 3))
    dirs = np.ascontiguousarray(dirs / np.linalg.norm(dirs, axis=1)[:, None])
    a, b, c = (np.ascontiguousarray(x) for x in mesh.corners)
    pts = np.ascontiguousarray(rng.uniform(-2, 2, (n_points, 3)) + [0, 0, 4.3])
    th = np.linspace(0, 2 * np.pi, 2000, endpoint=False)
    poly = np.ascontiguousarray(np.c_[np.cos(th), np.sin(th)])
    wpts = np.ascontiguousarray(rng.uniform(-1.5, 1.5, (n_points, 2)))

    def step(k):
        def run():
            y, z, psi = 0.5, 0.0, 0.0
            d = k.linear_rhs(y, psi, 1.0, 1.0)
            for _ in range(20000):
                res = k.dp45_linear_step(y, z, psi, d[0], d[1], d[2], 1e-3, 1.0, 1.0)
                y, z, psi = res[0], res[1], res[2]
                d = k.linear_rhs(y, psi, 1.0, 1.0)
        return run

    return mesh.n_triangles, {
        "build_bvh": lambda k: (lambda: k.build_bvh(tlo, thi, 4)),
        "ray_hits": lambda k: (lambda: k.ray_hits(v0, e1, e2, *bvh, origins, dirs, 0.0, np.inf, 8)),
        "nearest_triangle": lambda k: (lambda: k.nearest_triangle(a, b, c, *bvh, pts)),
        "winding_numbers": lambda k: (lambda: k.winding_numbers(poly, wpts, 1e-12)),
        "dp45_step x20000": step,
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-theta", type=int, default=128)
    ap.add_argument("--rays", type=int, default=2000)
    ap.add_argument("--points", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    n_tri, jobs = workloads(args.n_theta, args.rays, args.points)
    print(f"mesh: {n_tri} triangles, {args.rays} rays, {args.points} points")
    print(f"{'kernel':<20}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, make in jobs.items():
        t_nb = best_of(make(_numba), args.repeat)
        t_np = best_of(make(_numpy), args.repeat)
        print(f"{name:<20}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
