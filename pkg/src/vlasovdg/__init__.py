"""Semi-Lagrangian discontinuous Galerkin solver for 1+1D Vlasov-Poisson with Strang splitting."""

from .diagnostics import (
    ConvergenceReport,
    TimeSeries,
    convergence_study,
    detect_recurrence,
    fit_decay_rate,
    l2_error_vs_function,
    l2_error_vs_reference,
    time_convergence_study,
)
from .field import PiecewisePoly1D, density, electric_energy, electric_field
from .legendre import QuadratureRule, gauss_rule, legendre_eval, scaled_legendre_eval
from .problems import ProblemSpec, advection_recurrence, get_problem, landau, molenkamp_crowley
from .projection import DGField, GridSpec, evaluate, mass, norm, project
from .shift import ShiftTable, build_shift_table, shift_1d
from .splitting import StepperState, run, step_A, step_B, strang_step

__version__ = "0.1.0"
