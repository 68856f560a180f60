"""Geodesics on n-dimensional ellipsoids, integrated directly and through the Clebsch system."""
from .errors import *  # noqa: F401,F403
from .model import (
    ClebschState,
    Ellipsoid,
    PhaseState,
    ScalarForms,
    forms,
    joachimsthal,
    phase_state,
    project_constraints,
    reconstruct_x,
    sample_state,
    to_clebsch,
    validate_ellipsoid,
)
from .ode import OdeProblem, StepControl, adaptive_integrate, rk4_step, sample_trajectory
from .direct import direct_rhs, flow_direct, integrate_direct
from .clebsch import clebsch_at_times, clebsch_rhs, integrate_clebsch, omega_from_l, time_map
from .conserved import (
    InvariantSnapshot,
    TrajectorySample,
    clebsch_hamiltonian,
    drift_report,
    generating_function,
    identity_residuals,
    plucker_residual,
    uhlenbeck_integrals,
)
from .poisson import (
    Observable,
    hamiltonian_flow_check,
    involution_check,
    poisson_bracket,
)
from .bvp import ShootingProblem, shoot, solve_geodesic_bvp

__version__ = "0.1.0"
