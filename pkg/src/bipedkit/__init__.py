"""Biped gait generation, balance, kinematics and policy-search toolkit."""
from .model_core import (
    BalanceConfig,
    BalanceState,
    ComTrajectory,
    Footstep,
    FrameTransform,
    GaitCommand,
    NumericError,
    RobotParams,
    Side,
    SingularityError,
    ValidationError,
    ZmpReference,
    load_config,
    validate_params,
)
from .pipeline import GaitTrajectory, PipelineError, generate_gait
from .simulator import SimLog, simulate_walk

__version__ = "0.1.0"

__all__ = [
    "BalanceConfig", "BalanceState", "ComTrajectory", "Footstep", "FrameTransform",
    "GaitCommand", "GaitTrajectory", "NumericError", "PipelineError", "RobotParams", "Side",
    "SimLog", "SingularityError", "ValidationError", "ZmpReference", "generate_gait",
    "load_config", "simulate_walk", "validate_params",
]
