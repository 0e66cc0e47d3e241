"""Batch command-line front end.

Every subcommand reads an optional JSON config (``--config``), applies
``--set key=value`` overrides and writes its outputs to ``--out``. Exit codes:
0 success, 2 invalid configuration or input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .alexandrov import (
    AlexandrovError,
    ScanPlane,
    alexandrov_symmetry,
    alpha_table,
    perturb_radially,
    tilted_cylinder,
)
from .bounds import BoundsError, min_positive_ends, parity_harness, theorem_two_verdict
from .flux import (
    EndSpec,
    FluxError,
    Parallel,
    cmc_mass,
    flux_at_parallel,
    flux_quadrature,
    mass_of_end,
    parallel_cap,
    parallel_loop,
)
from .mesh import MeshError, icosphere_directions
from .profile import (
    DEFAULT_TOL,
    IntegrationError,
    ProfileState,
    delaunay_family,
    detect_extrema,
    integrate_profile,
    max_radius,
    revolve,
    sphere_profile,
)
from .weingarten import (
    BracketError,
    CMC,
    Linear,
    SingularDenominatorError,
    WeingartenError,
    relation_from_config,
    relation_to_config,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

DEFAULT_RELATION = {"kind": "linear", "a": 1.0, "b": 1.0}


class NumericalFailure(RuntimeError):
    pass


def workers_from_env() -> int:
    raw = os.environ.get("WLAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def _get(cfg, key, default=None, kind=float):
    val = cfg.get(key, default)
    if val is None:
        return None
    try:
        return kind(val)
    except (TypeError, ValueError):
        raise io.ConfigError(f"config key {key!r} has invalid value {val!r}") from None


def _tol(cfg, key="tol", default=DEFAULT_TOL):
    val = _get(cfg, key, default)
    if not (val > 0 and math.isfinite(val)):
        raise io.ConfigError(f"{key} must be a positive number, got {val}")
    return val


def _relation(cfg):
    return relation_from_config(cfg.get("relation", DEFAULT_RELATION))


def _linear_relation(cfg):
    rel = _relation(cfg)
    if not isinstance(rel, (Linear, CMC)):
        raise io.ConfigError("this command needs a linear or cmc relation")
    return rel


def _neck(cfg, rel):
    a = rel.ab[0]
    r = _get(cfg, "neck_r", 0.5 * a)
    if not (0 < r <= a):
        raise io.ConfigError(f"neck_r must lie in (0, a] = (0, {a}], got {r}")
    return r


# -- commands -------------------------------------------------------------

def cmd_profile(cfg, out: Path):
    rel = _relation(cfg)
    tol = _tol(cfg)
    shape = cfg.get("shape", "delaunay")
    summary = {"relation": relation_to_config(rel), "shape": shape}
    if shape == "sphere":
        a, b = _linear_relation(cfg).ab
        curve = sphere_profile(a, b, tol=tol)
        summary.update(max_radius=max_radius(curve), expected_radius=a + math.sqrt(a * a + b), status=curve.status)
        extrema = detect_extrema(curve)
    elif shape == "delaunay":
        rel = _linear_relation(cfg)
        r = _neck(cfg, rel)
        periods = _get(cfg, "periods", 1, int)
        if periods < 1:
            raise io.ConfigError("periods must be at least 1")
        prof = delaunay_family(rel, r, tol=tol)
        curve = prof.curve
        if periods > 1:
            curve = integrate_profile(ProfileState(0.0, r, 0.0, 0.0), rel, periods * prof.period, tol)
        extrema = prof.extrema
        summary.update(
            R=prof.R, r=prof.r, period=prof.period, I0=prof.I0, identity_residual=prof.R + prof.r - 2 * rel.ab[0],
            first_integral_drift=curve.first_integral_drift(),
        )
    else:
        raise io.ConfigError(f"unknown shape {shape!r}")
    io.write_profile_csv(out / "profile.csv", curve)
    io.write_extrema_csv(out / "extrema.csv", extrema)
    n_theta = cfg.get("obj_n_theta")
    if n_theta:
        io.write_obj(out / "profile.obj", revolve(curve, int(n_theta)))
    io.write_json(out / "profile.json", summary)
    return summary


def _sweep_one(args):
    rel, r, tol = args
    p = delaunay_family(rel, r, tol=tol)
    a, b = rel.ab
    return {
        "neck_r": r,
        "R": p.R,
        "r": p.r,
        "period": p.period,
        "I0": p.I0,
        "identity_residual": p.R + p.r - 2 * a,
        "mass": mass_of_end(EndSpec(1, p.R, p.r, b)),
        "first_integral_drift": p.curve.first_integral_drift(),
    }


def cmd_sweep(cfg, out: Path, workers: int):
    rel = _linear_relation(cfg)
    a = rel.ab[0]
    tol = _tol(cfg)
    fracs = cfg.get("neck_fractions", [0.1 * k for k in range(1, 10)])
    radii = [float(f) * a for f in fracs]
    if any(not (0 < r <= a) for r in radii):
        raise io.ConfigError("neck fractions must lie in (0, 1]")
    jobs = [(rel, r, tol) for r in radii]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(min(workers, len(jobs))) as ex:
            rows = list(ex.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]
    keys = ("neck_r", "R", "r", "period", "I0", "identity_residual", "mass", "first_integral_drift")
    io._write_csv(out / "sweep.csv", keys, ([io.fmt(row[k]) for k in keys] for row in rows))
    summary = {"relation": relation_to_config(rel), "count": len(rows),
               "max_identity_residual": max(abs(r["identity_residual"]) for r in rows)}
    io.write_json(out / "sweep.json", summary)
    return summary


def cmd_flux(cfg, out: Path):
    rel = _linear_relation(cfg)
    a, b = rel.ab
    r = _neck(cfg, rel)
    n_theta = _get(cfg, "n_theta", 512, int)
    if n_theta < 3:
        raise MeshError(f"n_theta={n_theta} gives an empty mesh")
    prof = delaunay_family(rel, r, tol=_tol(cfg))
    fractions = cfg.get("parallels", [0.0, 0.25, 0.5])  # fractions of the period; 0 = neck, 0.5 = bulge
    records = []
    for f in fractions:
        st = prof.curve.state_at(float(f) * prof.period)
        p = Parallel(st.y, st.psi, st.z, 1)
        closed = flux_at_parallel(p, a, b)
        quad = flux_quadrature(parallel_loop(p, rel, n_theta), parallel_cap(p, n_theta), a, b)
        records.append({
            "parallel": {"y": st.y, "psi": st.psi, "z": st.z},
            "closed_form": closed,
            "quadrature": quad,
            "rel_err": abs(quad - closed) / abs(closed),
        })
    report = {"relation": relation_to_config(rel), "R": prof.R, "r": prof.r,
              "mass": math.pi * (prof.R * prof.r + b), "records": records}
    io.write_json(out / "flux.json", report)
    return report


def cmd_mass(cfg, out: Path):
    ends = cfg.get("ends")
    results = []
    if ends is None:
        if "H" in cfg:
            r, H = _get(cfg, "r"), _get(cfg, "H")
            results.append({"r": r, "H": H, "mass": cmc_mass(r, H)})
        else:
            rel = _linear_relation(cfg)
            prof = delaunay_family(rel, _neck(cfg, rel))
            e = EndSpec(1, prof.R, prof.r, rel.ab[1])
            results.append({"R": e.R, "r": e.r, "b": e.b, "mass": mass_of_end(e)})
    else:
        for spec in ends:
            e = _end_from(spec)
            results.append({"sign": e.sign, "R": e.R, "r": e.r, "b": e.b, "mass": mass_of_end(e)})
    report = {"masses": results}
    io.write_json(out / "mass.json", report)
    return report


def _end_from(spec):
    if not isinstance(spec, dict):
        raise io.ConfigError("each end must be an object")
    try:
        return EndSpec(int(spec.get("sign", 1)), float(spec["R"]), float(spec["r"]), float(spec.get("b", 0.0)))
    except KeyError as exc:
        raise io.ConfigError(f"end is missing {exc}") from None


def _alex_mesh(cfg):
    src = cfg.get("mesh")
    n_theta = _get(cfg, "n_theta", 256, int)
    if src is None or src == "delaunay":
        rel = _linear_relation(cfg)
        prof = delaunay_family(rel, _neck(cfg, rel))
        return revolve(prof.curve, n_theta, caps=True), {"shape": "capped-delaunay-period"}
    if src == "sphere":
        a, b = _linear_relation(cfg).ab
        return revolve(sphere_profile(a, b), n_theta), {"shape": "sphere"}
    if src == "tilted":
        return tilted_cylinder(_get(cfg, "rho", 1.0), _get(cfg, "beta", 0.4), _get(cfg, "height", 3.0), n_theta), {
            "shape": "tilted-cylinder"}
    return io.read_obj(src), {"shape": "obj", "path": str(src)}


def cmd_alexandrov(cfg, out: Path):
    mesh, info = _alex_mesh(cfg)
    if not mesh.is_closed():
        raise MeshError("alexandrov needs a closed mesh")
    tol = _tol(cfg, default=1e-3)
    dirs = cfg.get("directions", "grid")
    directions = icosphere_directions() if dirs == "grid" else np.asarray(dirs, dtype=float)
    results = []
    for nu in directions:
        res = alexandrov_symmetry(mesh, nu, tol)
        results.append({
            "nu": [float(x) for x in nu / np.linalg.norm(nu)],
            "found": res.found,
            "level": res.plane.level() if res.found else None,
            "forward": res.forward.to_dict(),
            "backward": res.backward.to_dict(),
            "hausdorff": res.hausdorff,
        })
    report = {"mesh": info, "n_triangles": mesh.n_triangles, "tol": tol, "symmetry": results}
    alpha_cfg = cfg.get("alpha")
    if alpha_cfg:
        d = float(alpha_cfg.get("d", 2.0))
        plane = ScanPlane((-d, 0.0, 0.0), (1.0, 0.0, 0.0), 0.0)
        lo, hi = mesh.bounds()
        heights = alpha_cfg.get("heights") or list(np.linspace(lo[2], hi[2], 22)[1:-1])
        amp = float(alpha_cfg.get("perturbation", 0.0))
        target = mesh if amp == 0 else perturb_radially(mesh, lambda th, z: amp * np.exp(-z) * np.cos(th))
        table = alpha_table(target, plane, heights, int(alpha_cfg.get("n_rays", 256)))
        io.write_alpha_csv(out / "alpha.csv", table)
        report["alpha_max_error"] = float(np.nanmax(np.abs(table.alpha - d)))
    io.write_json(out / "alexandrov.json", report)
    return report


def cmd_bounds(cfg, out: Path):
    ends = [_end_from(e) for e in cfg.get("ends", [])]
    if "disk_area" in cfg:
        area = _get(cfg, "disk_area")
    elif "boundary_radius" in cfg:
        rad = _get(cfg, "boundary_radius")
        if rad <= 0:
            raise BoundsError(f"boundary radius must be positive, got {rad}")
        area = math.pi * rad * rad
    else:
        raise io.ConfigError("bounds needs disk_area or boundary_radius")
    a = cfg.get("a")
    rep = theorem_two_verdict(area, ends, a=None if a is None else float(a))
    report = rep.to_dict()
    if "a" in cfg and "b" in cfg:
        r = math.sqrt(area / math.pi)
        report["min_positive_ends"] = min_positive_ends(r, _get(cfg, "a"), _get(cfg, "b"),
                                                        sharp=bool(cfg.get("sharp", False)))
    io.write_json(out / "bounds.json", report)
    return report


def cmd_parity(cfg, out: Path, workers: int):
    n = _get(cfg, "trials", 1000, int)
    seed = _get(cfg, "seed", 0, int)
    if n < 1:
        raise io.ConfigError("trials must be positive")
    rep = parity_harness(n, seed=seed, n_theta=_get(cfg, "n_theta", 32, int), workers=workers)
    io.write_parity_csv(out / "parity.csv", rep)
    summary = {"trials": len(rep.trials), "rejected": rep.rejected, "all_passed": rep.all_passed,
               "observed_counts": rep.counts(), "seed": seed}
    io.write_json(out / "parity.json", summary)
    return summary


# -- driver -----------------------------------------------------------------

COMMANDS = ("profile", "sweep", "flux", "mass", "alexandrov", "bounds", "parity")


def build_parser():
    p = argparse.ArgumentParser(prog="wlab", description="Rotational linear Weingarten surface toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON configuration file")
        s.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry (dotted keys, JSON values)")
        s.add_argument("--out", default=".", help="output directory")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = io.load_config(args.config) if args.config else {}
        cfg = io.apply_overrides(cfg, args.overrides)
        out.mkdir(parents=True, exist_ok=True)
        workers = workers_from_env()
        cmd = args.command
        if cmd == "profile":
            summary = cmd_profile(cfg, out)
        elif cmd == "sweep":
            summary = cmd_sweep(cfg, out, workers)
        elif cmd == "flux":
            summary = cmd_flux(cfg, out)
        elif cmd == "mass":
            summary = cmd_mass(cfg, out)
        elif cmd == "alexandrov":
            summary = cmd_alexandrov(cfg, out)
        elif cmd == "bounds":
            summary = cmd_bounds(cfg, out)
        else:
            summary = cmd_parity(cfg, out, workers)
    except (IntegrationError, BracketError, SingularDenominatorError, FloatingPointError, NumericalFailure) as exc:
        print(f"wlab {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (io.ConfigError, WeingartenError, FluxError, BoundsError, MeshError, AlexandrovError,
            ValueError, KeyError, TypeError) as exc:
        print(f"wlab {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(io.dumps({"command": args.command, "out": str(out)} | {"summary": _brief(summary)}), end="")
    return EXIT_OK


def _brief(summary):
    if isinstance(summary, dict):
        return {k: v for k, v in summary.items() if not isinstance(v, list) or len(v) <= 10}
    return summary


if __name__ == "__main__":
    sys.exit(main())
