"""Real quasimomenta of N point bosons on a segment with zero boundary conditions.

The Gaudin equations are solved by minimizing a strictly convex potential
whose gradient is a smooth rewrite of the equations. The package also
provides the diagnostics used to check uniqueness, ordering and positive
definiteness numerically.
"""

from .analysis import (
    MinorChain,
    NotPositiveDefinite,
    OrderingReport,
    RegimeWarning,
    check_ordering,
    dominant_minors,
    energy,
    limit_deviation,
    periodic_halving_check,
    scan_minor_chains,
)
from .equations import (
    DegenerateConfiguration,
    UndefinedAtZero,
    antiderivative_F,
    arctan_reflect,
    hessian_B,
    hessian_B_reduced,
    potential_B,
    potential_B_reduced,
    quadratic_form_parts,
    residual_periodic,
    residual_raw,
    residual_reduced,
    residual_transformed,
)
from .model import (
    CanonicalForm,
    InvalidSpec,
    LengthMismatch,
    MomentumLabels,
    NotCanonical,
    RootSet,
    SystemSpec,
    canonicalize,
    momentum_labels,
    reduced_labels,
    same_physical_solution,
    validate_spec,
)
from .solver import (
    FactorizationError,
    NoConvergence,
    OracleStall,
    SolveReport,
    SolverConfig,
    multistart_probe,
    oracle_solve,
    solve,
    solve_periodic,
    solve_reduced,
)

__version__ = "0.1.0"
