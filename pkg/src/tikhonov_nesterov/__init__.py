"""Nesterov-type gradient method with two Tikhonov regularization terms."""
from .problems import (
    InvalidProblemError,
    MinNormOracle,
    Objective,
    OracleFailureError,
    TikhonovPoint,
    UnboundedBelowError,
    paper_quadratic,
    psd_quadratic,
    shifted_quadratic,
    tikhonov_point,
)
from .schedules import (
    PolyScheduleParams,
    Schedule,
    b_coef,
    bp_closed_form,
    c_coef,
    check_Q,
    check_growth_hypotheses,
    check_theorem2_hypotheses,
    cp_closed_form,
    eps_at,
    find_k2,
    generic_schedule,
    k0_poly,
    k1_index,
    polynomial_schedule,
    q_at,
)
from .solver import DivergenceError, SolverConfig, Trace, run, run_matrix, step, step_equivalent

__version__ = "0.1.0"
