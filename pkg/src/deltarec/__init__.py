"""Distributions whose delta-record count, compensated by c times the
running maximum, is a martingale: constructors, delay solvers,
positivity criteria, transforms and a Monte Carlo verifier."""

from .core import (
    ClosedForm,
    ContinuousSolution,
    DiscreteSurvival,
    HorizonError,
    InitialFunction,
    ProblemParams,
    ResidualCertificate,
    ValidationError,
    eval_survival,
    from_json,
    mean_of,
    mix,
    residual_H,
    residual_sup,
    support_probes,
    tail_condition,
    to_csv,
    to_json,
)
from .constructors import (
    RateRoots,
    construct_bounded,
    construct_neg_delta,
    continuous_threshold,
    exponential_member,
    gamma_exp_mixture,
    geom_negbin_mixture,
    geometric_member,
    lattice_threshold,
    neg_delta_pinned_g0,
    solve_exponential_rates,
    solve_geometric_params,
    tangent_continuous_params,
    tangent_lattice_params,
)
from .criteria import (
    CriterionReport,
    check_continuous,
    check_lattice,
    discrete_convex_sum_bound,
    dominated_sequence_bound,
    gap_region_table,
    random_phi_continuous,
    random_phi_lattice,
    recurrence_params,
    recurrence_solution,
    retarget_initial,
    sandwich_bounds,
)
from .dde import (
    PositivityVerdict,
    StepSolverConfig,
    compare_with_member,
    decay_envelope_check,
    fundamental_function,
    initial_from_density,
    positivity_scan,
    solve_steps,
)
from .lattice import (
    LatticeSolution,
    decay_bound_check,
    positivity_scan_lattice,
    solve_steps_lattice,
    threshold_lattice,
)
from .simulate import (
    MartingaleReport,
    Path,
    PathState,
    conditional_residual_probe,
    martingale_test,
    run_path,
    sample,
)
from .transforms import MomentTable, laplace, moments

__version__ = "0.1.0"
