"""Scalar kernels written once and compiled by numba or run as plain Python.

Only ``math`` and arithmetic are used here so the same source works in both
modes.
"""
import math

# Dormand-Prince 5(4) tableau.
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


def linear_rhs(y, psi, a, b):
    """(dy/ds, dz/ds, dpsi/ds) for 2aH + bK = 1 with kappa2 = cos(psi)/y."""
    c = math.cos(psi)
    k2 = c / y
    den = a + b * k2
    if den == 0.0:
        return math.sin(psi), c, math.nan
    k1 = (1.0 - a * k2) / den
    return math.sin(psi), c, -k1


def make_dp45_linear_step(linear_rhs):
    """Build a Dormand-Prince step for the linear profile ODE around ``linear_rhs``."""

    def dp45_linear_step(y, z, psi, dy0, dz0, dp0, h, a, b):
        # (dy0, dz0, dp0) is the derivative at the step start (FSAL). Returns
        # the 5th-order state, the embedded error estimate and the derivative
        # at the new point.
        k1y, k1z, k1p = dy0, dz0, dp0
        k2y, k2z, k2p = linear_rhs(y + h * A21 * k1y, psi + h * A21 * k1p, a, b)
        k3y, k3z, k3p = linear_rhs(
            y + h * (A31 * k1y + A32 * k2y), psi + h * (A31 * k1p + A32 * k2p), a, b
        )
        k4y, k4z, k4p = linear_rhs(
            y + h * (A41 * k1y + A42 * k2y + A43 * k3y),
            psi + h * (A41 * k1p + A42 * k2p + A43 * k3p),
            a,
            b,
        )
        k5y, k5z, k5p = linear_rhs(
            y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y),
            psi + h * (A51 * k1p + A52 * k2p + A53 * k3p + A54 * k4p),
            a,
            b,
        )
        k6y, k6z, k6p = linear_rhs(
            y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y),
            psi + h * (A61 * k1p + A62 * k2p + A63 * k3p + A64 * k4p + A65 * k5p),
            a,
            b,
        )
        yn = y + h * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
        zn = z + h * (B1 * k1z + B3 * k3z + B4 * k4z + B5 * k5z + B6 * k6z)
        pn = psi + h * (B1 * k1p + B3 * k3p + B4 * k4p + B5 * k5p + B6 * k6p)
        k7y, k7z, k7p = linear_rhs(yn, pn, a, b)
        ey = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
        ez = h * (E1 * k1z + E3 * k3z + E4 * k4z + E5 * k5z + E6 * k6z + E7 * k7z)
        ep = h * (E1 * k1p + E3 * k3p + E4 * k4p + E5 * k5p + E6 * k6p + E7 * k7p)
        return yn, zn, pn, ey, ez, ep, k7y, k7z, k7p

    return dp45_linear_step


dp45_linear_step = make_dp45_linear_step(linear_rhs)
