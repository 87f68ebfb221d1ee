"""Multi-objective optimal regression designs on discrete design grids.

Solves single-objective, efficiency-constrained, and maximin-efficiency
design problems over a probability simplex of candidate-point weights, and
certifies candidate designs as delta-optimal by solving small linear
programs over the grid's dispersion values.
"""

from .certify import (
    Certificate,
    InfeasibleDesignError,
    certify_constrained,
    certify_maximin,
    dispersion_report,
    verify_single,
    write_certificate_json,
    write_dispersion_csv,
)
from .criteria import (
    CriterionSpec,
    EigenInfo,
    SingularInformationMatrix,
    criterion_gradient,
    criterion_value,
    dispersion,
    efficiency,
    efficiency_bound,
    efficiency_bound_slope,
    efficiency_from_value,
    min_eigen_dispersion,
    min_eigen_info,
)
from .lp import LinearProgram, LpResult, lp_solve
from .model_grid import (
    Design,
    DesignGrid,
    FiniteFactor,
    IntervalFactor,
    RegressionModel,
    build_grid,
    compartment_model,
    emax_model,
    gradient_vector,
    information_matrix,
    integral_L_matrix,
    interaction_model,
    linear_model,
    logistic_model,
    model_value,
)
from .solve import (
    MultiObjectiveProblem,
    SolveResult,
    presolve,
    solve_constrained,
    solve_maximin,
    solve_single,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
