from csbats.graphs.distribution import (
    load_distribution,
    save_distribution,
    truncate_top_m,
)

from .degree import (
    DEFAULT_ETA,
    DEFAULT_GRID,
    InfeasibleProblem,
    OptProblem,
    batch_omega,
    constant_omega,
    constraint_matrix,
    linear_omega,
    optimize,
    zeta,
)

__all__ = [
    # Linear program
    "DEFAULT_ETA",
    "DEFAULT_GRID",
    "InfeasibleProblem",
    "OptProblem",
    "constraint_matrix",
    "optimize",
    # Omega evaluators
    "batch_omega",
    "constant_omega",
    "linear_omega",
    "zeta",
    # Distribution files
    "load_distribution",
    "save_distribution",
    "truncate_top_m",
]
