"""Weingarten relations H = f(H^2 - K) and the pointwise curvature solve.

Three flavours are supported: the linear class 2aH + bK = 1, constant mean
curvature, and a general elliptic ``f`` given either analytically or by a
monotone sample table. Principal curvatures follow the profile convention
used throughout the package: ``kappa1`` along the generating curve,
``kappa2`` along the parallels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

RESIDUAL_TOL = 1e-12
ELLIPTIC_MARGIN = 1e-10


class WeingartenError(ValueError):
    pass


class SingularDenominatorError(WeingartenError, ZeroDivisionError):
    pass


class BracketError(WeingartenError):
    pass


@dataclass(frozen=True)
class Linear:
    """2aH + bK = 1 with a, b > 0."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise WeingartenError(f"linear relation needs a > 0 and b > 0, got a={self.a}, b={self.b}")

    @property
    def ab(self):
        return self.a, self.b


@dataclass(frozen=True)
class CMC:
    """Constant mean curvature H != 0 (the b = 0 member of the linear class)."""

    H: float

    def __post_init__(self):
        if self.H == 0 or not math.isfinite(self.H):
            raise WeingartenError("cmc relation needs a finite nonzero H")

    @property
    def ab(self):
        return 1.0 / (2.0 * self.H), 0.0


@dataclass(frozen=True)
class GeneralElliptic:
    """H = f(t), t = H^2 - K, with ``fprime`` the derivative of ``f``."""

    f: Callable[[float], float]
    fprime: Callable[[float], float]
    name: str = "general"


Relation = Union[Linear, CMC, GeneralElliptic]


@dataclass(frozen=True)
class CurvaturePair:
    kappa1: float
    kappa2: float

    @property
    def H(self):
        return 0.5 * (self.kappa1 + self.kappa2)

    @property
    def K(self):
        return self.kappa1 * self.kappa2


@dataclass(frozen=True)
class EllipticityResult:
    ok: bool
    margin: float
    worst_t: float

    def __bool__(self):
        return self.ok


def linear_to_f(a: float, b: float) -> GeneralElliptic:
    """Rewrite 2aH + bK = 1 as H = f(H^2 - K) on the H > 0 branch."""
    if not (a > 0 and b > 0):
        raise WeingartenError(f"need a > 0 and b > 0, got a={a}, b={b}")
    c = a * a + b

    def f(t):
        # (sqrt(c + b^2 t) - a) / b without the cancellation for small b
        return (1.0 + b * t) / (math.sqrt(c + b * b * t) + a)

    def fprime(t):
        return b / (2.0 * math.sqrt(c + b * b * t))

    return GeneralElliptic(f, fprime, name=f"linear(a={a}, b={b})")


def table_relation(t, f) -> GeneralElliptic:
    """General relation from samples of f on a strictly increasing t-grid.

    Interpolation is monotone cubic (PCHIP); the derivative is taken from the
    interpolant, so ellipticity should be checked on the result.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    if t.ndim != 1 or t.shape != f.shape or t.size < 2:
        raise WeingartenError("table needs matching 1-d t and f arrays with at least 2 samples")
    if np.any(np.diff(t) <= 0) or t[0] < 0:
        raise WeingartenError("table t-grid must be nonnegative and strictly increasing")
    interp = PchipInterpolator(t, f, extrapolate=True)
    deriv = interp.derivative()
    return GeneralElliptic(lambda x: float(interp(x)), lambda x: float(deriv(x)), name="table")


def as_general(relation: Relation) -> GeneralElliptic:
    if isinstance(relation, GeneralElliptic):
        return relation
    if isinstance(relation, Linear):
        return linear_to_f(relation.a, relation.b)
    H = relation.H
    return GeneralElliptic(lambda t: H, lambda t: 0.0, name=f"cmc(H={H})")


def f_at_zero(relation: Relation) -> float:
    """Umbilic curvature: the value of f at t = 0 (the sphere's curvature)."""
    return as_general(relation).f(0.0)


def check_ellipticity(relation: Relation, t_max: float = 1e6, n_samples: int = 2001) -> EllipticityResult:
    """Test 4 t f'(t)^2 < 1 on a log-spaced grid over (0, t_max].

    The inequality must hold with a margin of at least ``ELLIPTIC_MARGIN``;
    equality (e.g. f = sqrt(t)) counts as a failure.
    """
    if not t_max > 0 or n_samples < 2:
        raise WeingartenError("need t_max > 0 and n_samples >= 2")
    rel = as_general(relation)
    ts = np.geomspace(t_max * 1e-12, t_max, n_samples)
    margins = np.array([1.0 - 4.0 * t * rel.fprime(t) ** 2 for t in ts])
    margins[~np.isfinite(margins)] = -np.inf
    k = int(np.argmin(margins))
    margin = float(margins[k])
    return EllipticityResult(margin >= ELLIPTIC_MARGIN, margin, float(ts[k]))


def solve_kappa1(relation: Relation, kappa2: float) -> float:
    """Profile curvature kappa1 such that (kappa1, kappa2) satisfies the relation."""
    if isinstance(relation, Linear):
        a, b = relation.a, relation.b
        den = a + b * kappa2
        if den == 0.0:
            raise SingularDenominatorError(f"a + b*kappa2 = 0 at kappa2={kappa2}")
        return (1.0 - a * kappa2) / den
    if isinstance(relation, CMC):
        return 2.0 * relation.H - kappa2
    return _solve_general(relation, kappa2)


def residual(relation: Relation, kappa1: float, kappa2: float) -> float:
    """g(kappa1) = H - f(H^2 - K); strictly increasing in kappa1 when elliptic."""
    rel = as_general(relation)
    return 0.5 * (kappa1 + kappa2) - rel.f((0.5 * (kappa1 - kappa2)) ** 2)


def _solve_general(rel: GeneralElliptic, kappa2: float, tol: float = RESIDUAL_TOL, max_iter: int = 200) -> float:
    f, fp = rel.f, rel.fprime

    def g(k1):
        half = 0.5 * (k1 - kappa2)
        return 0.5 * (k1 + kappa2) - f(half * half)

    def dg(k1):
        half = 0.5 * (k1 - kappa2)
        return 0.5 - fp(half * half) * half

    def noise(k1):
        # rounding level of g; a sign below it is not trusted
        return 8.0 * np.finfo(float).eps * (abs(k1) + abs(kappa2) + abs(f(0.0)) + 1.0)

    width = 2.0 * (abs(f(0.0)) + abs(kappa2) + 1.0)
    lo, hi = kappa2 - width, kappa2 + width
    glo, ghi = g(lo), g(hi)
    for _ in range(60):
        if glo < -noise(lo) and ghi > noise(hi):
            break
        width *= 2.0
        lo, hi = kappa2 - width, kappa2 + width
        glo, ghi = g(lo), g(hi)
    else:
        raise BracketError(f"no sign change for kappa2={kappa2} on [{lo}, {hi}] (g={glo}, {ghi})")

    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        gx = g(x)
        if abs(gx) < tol:
            return x
        if gx < 0.0:
            lo = x
        else:
            hi = x
        d = dg(x)
        step_ok = d > 0.0
        if step_ok:
            xn = x - gx / d
            step_ok = lo < xn < hi
        x = xn if step_ok else 0.5 * (lo + hi)
        if hi - lo < 4e-16 * max(1.0, abs(x)):
            break
    gx = g(x)
    if abs(gx) >= tol:
        raise BracketError(f"root not resolved for kappa2={kappa2}: residual {gx:.3e} in [{lo}, {hi}]")
    return x


def curvature_pair(relation: Relation, kappa2: float) -> CurvaturePair:
    return CurvaturePair(solve_kappa1(relation, kappa2), kappa2)


def relation_from_config(spec: dict) -> Relation:
    """Parse ``{"kind": "linear"|"cmc"|"table", ...}``."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise WeingartenError("relation config must be an object with a 'kind' field")
    kind = spec["kind"]
    try:
        if kind == "linear":
            return Linear(float(spec["a"]), float(spec["b"]))
        if kind == "cmc":
            return CMC(float(spec["H"]))
        if kind == "table":
            return table_relation(spec["t"], spec["f"])
    except KeyError as exc:
        raise WeingartenError(f"relation config of kind {kind!r} is missing {exc}") from None
    raise WeingartenError(f"unknown relation kind {kind!r}")


def relation_to_config(relation: Relation) -> dict:
    if isinstance(relation, Linear):
        return {"kind": "linear", "a": relation.a, "b": relation.b}
    if isinstance(relation, CMC):
        return {"kind": "cmc", "H": relation.H}
    return {"kind": "general", "name": relation.name}
