"""Opinion dynamics under hard per-agent budget constraints, modelled as a
projected dynamical system, with equilibrium certification and structural
checks."""

from .core_model import (
    OpinionProfile,
    ProblemInstance,
    SystemMatrices,
    build_instance,
    potential,
    system_matrices,
    utility,
    vector_field,
)
from .equilibrium_solver import (
    EquilibriumReport,
    best_response,
    solve_equilibrium,
    unconstrained_equilibrium,
    verify_nash,
    verify_vi,
)
from .feasible_set import (
    AgentPolytope,
    active_set,
    project_euclidean,
    project_profile,
    project_tangent_cone,
    project_weighted,
)
from .pds_integrator import SimConfig, Trajectory, residual, simulate, step
from .structure_analysis import (
    check_necessary_conditions,
    classify,
    partition_agents,
    sufficient_exhaust,
    sufficient_not_exhaust,
)

__version__ = "0.1.0"
