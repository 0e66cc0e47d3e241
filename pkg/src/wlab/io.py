"""File formats: profile/alpha/parity CSV, Wavefront OBJ, JSON reports and configs."""
from __future__ import annotations

import copy
import csv
import json
import math
from pathlib import Path

import numpy as np

from .mesh import MeshError, TriMesh


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    """Shortest round-trip decimal for a float (``repr``)."""
    return repr(float(x))


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)
    return path


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [row for row in r if row]
    return header, rows


# -- profiles ---------------------------------------------------------------

def write_profile_csv(path, curve):
    rows = (
        (fmt(s), fmt(y), fmt(z), fmt(p), fmt(i))
        for s, y, z, p, i in zip(curve.s, curve.y, curve.z, curve.psi, curve.first_integral_values)
    )
    return _write_csv(path, ("s", "y", "z", "psi", "I"), rows)


def read_profile_csv(path) -> dict:
    header, rows = _read_csv(path)
    if header != ["s", "y", "z", "psi", "I"]:
        raise ConfigError(f"unexpected profile header {header}")
    data = np.array([[float(v) for v in row] for row in rows])
    return {k: data[:, i] for i, k in enumerate(header)}


def write_extrema_csv(path, extrema):
    rows = ((fmt(e.s), fmt(e.y), fmt(e.z), fmt(e.psi), e.kind) for e in extrema.events)
    return _write_csv(path, ("s", "y", "z", "psi", "kind"), rows)


# -- Alexandrov and parity tables ----------------------------------------------

def write_alpha_csv(path, table):
    return _write_csv(path, ("t", "alpha"), ((fmt(t), fmt(a)) for t, a in zip(table.heights, table.alpha)))


def read_alpha_csv(path):
    header, rows = _read_csv(path)
    if header != ["t", "alpha"]:
        raise ConfigError(f"unexpected alpha header {header}")
    data = np.array([[float(v) for v in row] for row in rows]).reshape(-1, 2)
    return data[:, 0], data[:, 1]


def write_parity_csv(path, report):
    rows = (
        (t.seed, t.index, t.result.n_loops, t.result.nonzero_count, t.result.verdict) for t in report.trials
    )
    return _write_csv(path, ("seed", "trial", "loop_count", "nonzero_winding_count", "verdict"), rows)


# -- OBJ --------------------------------------------------------------------

def write_obj(path, mesh: TriMesh):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for v in mesh.vertices:
            fh.write(f"v {fmt(v[0])} {fmt(v[1])} {fmt(v[2])}\n")
        for t in mesh.triangles + 1:
            fh.write(f"f {t[0]} {t[1]} {t[2]}\n")
    return path


def read_obj(path) -> TriMesh:
    """Vertices and faces of an OBJ file; polygons are fan-triangulated."""
    verts, tris = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = []
                for tok in parts[1:]:
                    k = int(tok.split("/")[0])
                    idx.append(k - 1 if k > 0 else len(verts) + k)
                if len(idx) < 3:
                    raise MeshError(f"face with fewer than 3 vertices on line {lineno}")
                for j in range(1, len(idx) - 1):
                    tris.append([idx[0], idx[j], idx[j + 1]])
    if not verts or not tris:
        raise MeshError(f"{path}: mesh has no vertices or no faces")
    mesh = TriMesh(np.array(verts), np.array(tris, dtype=np.int64))
    mesh.boundary_loops = mesh.find_boundary_loops()
    return mesh


# -- JSON -------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


# -- configs ----------------------------------------------------------------

def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def apply_overrides(cfg: dict, overrides) -> dict:
    """Apply ``key.sub=value`` overrides; values are parsed as JSON when possible."""
    out = copy.deepcopy(cfg)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = out
        parts = key.split(".")
        for p in parts[:-1]:
            nxt = node.setdefault(p, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {key!r} descends into a non-object")
            node = nxt
        node[parts[-1]] = value
    return out
