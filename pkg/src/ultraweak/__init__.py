"""Space-time ultra-weak Petrov-Galerkin solver for the 1D linear Schrödinger equation."""

from .assembly import (
    OperatorBundle1D,
    SeparablePotential,
    SpaceTimeSystem,
    Variant,
    assemble_bundle,
    assemble_general_system,
    assemble_optimal_system,
    assemble_rhs,
)
from .diagnostics import (
    StabilityReport,
    condition_number,
    eps_delta,
    fit_rate,
    galerkin_infsup,
    infsup_constant,
)
from .errors import UltraweakError
from .experiments import ExperimentConfig, ExperimentRecord, emit_csv, emit_json, run_convergence, run_table1
from .field import DiscreteSolution, Representation, deviation_dT, l2_spacetime_error, norm_deviation
from .galerkin import solve_galerkin
from .linsolve import solve_block_real, solve_complex
from .quadrature import QuadratureRule1D, gauss_legendre, integrate_1d, integrate_spacetime
from .reference import Scheme, TimeStepperConfig, analytic_case_a, run_timestepper
from .splines import Constraint, Mesh1D, SplineSpace, eval_basis, make_spatial_space, make_temporal_space

__version__ = "0.1.0"
