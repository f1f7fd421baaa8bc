"""Bandit simulations where deployed strategies reshape future arm rewards."""

from .environments import (
    BumpModel,
    ImpactState,
    Observation,
    PiecewiseLinearTwoArmModel,
    RewardModel,
    ScaledGaussianModel,
    TableModel,
    action_step,
    env_step,
    impact_update,
    initial_impact_state,
    instantaneous_utility,
    make_bump_instance,
)
from .harness import (
    AggregateCurve,
    RunRecord,
    derive_seed,
    log_checkpoints,
    replicate,
    run_episode,
    splitmix64,
    sublinearity_slope,
)
from .simplex import (
    DiscretizedArm,
    MetaArm,
    SimplexGrid,
    best_fixed_strategy,
    enumerate_meta_arms,
    level_matrix,
    make_grid,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateCurve",
    "BumpModel",
    "DiscretizedArm",
    "ImpactState",
    "MetaArm",
    "Observation",
    "PiecewiseLinearTwoArmModel",
    "RewardModel",
    "RunRecord",
    "ScaledGaussianModel",
    "SimplexGrid",
    "TableModel",
    "action_step",
    "best_fixed_strategy",
    "derive_seed",
    "enumerate_meta_arms",
    "env_step",
    "impact_update",
    "initial_impact_state",
    "instantaneous_utility",
    "level_matrix",
    "log_checkpoints",
    "make_bump_instance",
    "make_grid",
    "replicate",
    "run_episode",
    "splitmix64",
    "sublinearity_slope",
]
