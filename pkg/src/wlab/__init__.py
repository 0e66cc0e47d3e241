"""Rotational linear Weingarten surfaces: profiles, flux and mass, Alexandrov reflection, bounds and parity."""
from ._backend import backend_name
from .alexandrov import (
    AlexandrovError,
    AlphaTable,
    AnalyticRevolution,
    ScanOutcome,
    ScanPlane,
    SymmetryResult,
    alexandrov_symmetry,
    alpha,
    alpha1,
    alpha_limit_check,
    alpha_table,
    moving_plane_scan,
    perturb_radially,
    reflect_through_plane,
    tilted_cylinder,
)
from .bounds import (
    BalanceReport,
    BoundsError,
    ParityResult,
    balance,
    loop_parity_check,
    min_positive_ends,
    parity_harness,
    theorem_two_verdict,
    winding_number,
)
from .flux import (
    BalancingReport,
    Cycle,
    EndSpec,
    FluxError,
    LoopData,
    Parallel,
    balancing_check,
    cmc_mass,
    flux_at_parallel,
    flux_quadrature,
    mass_of_end,
    parallel_cap,
    parallel_loop,
    sphere_cap_cycle,
    tube_cycle,
)
from .mesh import MeshError, TriMesh, icosphere_directions
from .profile import (
    DelaunayProfile,
    IntegrationError,
    ProfileCurve,
    ProfileState,
    delaunay_family,
    detect_extrema,
    first_integral,
    integrate_profile,
    max_radius,
    revolve,
    sphere_profile,
)
from .weingarten import (
    CMC,
    GeneralElliptic,
    Linear,
    WeingartenError,
    check_ellipticity,
    curvature_pair,
    linear_to_f,
    solve_kappa1,
    table_relation,
)

__version__ = "0.1.0"
