"""Harvesting allocation for logistic metapopulations on stream networks."""

from ._kernels import BACKEND
from .asymptotics import (
    AsymptoticAdvice,
    Certainty,
    GroupedAllocation,
    NetFlowReport,
    asymptotic_biomass_strategy,
    asymptotic_limits,
    asymptotic_yield_strategy,
    effective_net_flow,
)
from .errors import (
    ArgumentError,
    DomainError,
    NumericalError,
    ScenarioError,
    StreamHarvestError,
    UnsupportedCaseError,
)
from .model import (
    EquilibriumResult,
    HarvestAllocation,
    Model,
    MsySolution,
    Trajectory,
    equilibrium_batch,
    integrate,
    jacobian,
    msy_unconstrained,
    origin_spectral_bound,
    rhs,
    solve_equilibrium,
    spectral_bound,
    total_biomass,
    total_yield,
)
from .networks import straight_stream, straight_stream_matrix, three_one_one, three_one_one_matrix
from .optimize import (
    Method,
    OptimizationProblem,
    OptimizationResult,
    optimize,
    project_simplex,
    projected_gradient,
    simplex_grid_search,
    sweep_theta,
)
from .regime import RegimeMapOutput, regime_map
from .scenario import ScenarioFile, parse_scenario
from .twopatch import (
    Regime,
    RegimeVerdict,
    ThresholdSet,
    TwoPatchScenario,
    biomass_derivative,
    boundary_biomass,
    classify_biomass,
    classify_yield,
    persistence_sufficient,
    persistent_for_all_theta,
    thresholds,
    tie_biomass,
    yield_derivative,
)

__version__ = "0.1.0"
