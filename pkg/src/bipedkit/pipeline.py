"""End-to-end gait generation: command -> plan -> ZMP -> CoM -> feet -> joints."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .com_solver import (
    compute_zmp,
    solve_com_cart_table_fourier,
    solve_com_pendulum_numeric,
)
from .kinematics import LegJoints, lower_body_ik
from .model_core import (
    ComTrajectory,
    FrameTransform,
    GaitCommand,
    RobotParams,
    Side,
    ValidationError,
    ZmpReference,
    validate_params,
)
from .swing_balance import com_frame, feet_world, heading_of
from .zmp_planner import (
    FootstepPlan,
    HeightProfile,
    compute_height_profile,
    generate_zmp_reference,
    plan_footsteps,
)

SOLVERS = ("cart-table", "pendulum")


class PipelineError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class GaitTrajectory:
    params: RobotParams
    plan: FootstepPlan
    zmp: ZmpReference
    com: ComTrajectory
    com_yaw: np.ndarray
    feet_world: list = field(default_factory=list)  # per sample {Side: FrameTransform}
    joints: Optional[np.ndarray] = None  # (n, 12): left chain then right chain

    @property
    def t(self):
        return self.zmp.t

    def com_velocity(self) -> np.ndarray:
        dt = self.com.dt
        return np.column_stack([np.gradient(self.com.x, dt), np.gradient(self.com.y, dt)])

    def feet_in_com(self, k: int) -> tuple[FrameTransform, FrameTransform]:
        c = self.com
        inv = com_frame(c.x[k], c.y[k], c.z[k], self.com_yaw[k]).inverse()
        f = self.feet_world[k]
        return inv.compose(f[Side.LEFT]), inv.compose(f[Side.RIGHT])


def solve_com(zmp: ZmpReference, plan: FootstepPlan, p: RobotParams, solver: str) -> ComTrajectory:
    if solver == "cart-table":
        return solve_com_cart_table_fourier(zmp, p, extension="even")
    if solver == "pendulum":
        flat = HeightProfile.constant(p.nominal_com_height_h, len(zmp), p.dt)
        first = solve_com_pendulum_numeric(zmp, flat, p)
        height = compute_height_profile(plan, np.column_stack([first.x, first.y]), p)
        return solve_com_pendulum_numeric(zmp, height, p)
    raise ValidationError(f"unknown solver {solver!r}; choose from {SOLVERS}")


def generate_gait(cmd: GaitCommand, p: RobotParams, n_steps: int, solver: str = "pendulum",
                  step_height: float = 0.04, with_joints: bool = True,
                  clamp: bool = True) -> GaitTrajectory:
    """Run every stage; failures are re-raised as :class:`PipelineError`."""
    stage = "params"
    try:
        validate_params(p)
        stage = "plan"
        plan = plan_footsteps(cmd, p, n_steps, clamp=clamp)
        stage = "zmp"
        zmp = generate_zmp_reference(plan, p)
        stage = "com"
        com = solve_com(zmp, plan, p, solver)
        stage = "feet"
        n = len(zmp)
        feet = [feet_world(plan, k * p.dt, p.double_support_ratio, step_height) for k in range(n)]
        yaw = np.array([heading_of(f) for f in feet])
        traj = GaitTrajectory(p, plan, zmp, com, yaw, feet)
        if with_joints:
            stage = "ik"
            traj.joints = np.array([joints_row(*lower_body_ik(*traj.feet_in_com(k), p))
                                    for k in range(n)])
    except (ValidationError, ArithmeticError) as exc:
        raise PipelineError(stage, exc) from exc
    return traj


def joints_row(left: LegJoints, right: LegJoints) -> np.ndarray:
    return np.concatenate([left.as_array(), right.as_array()])


def zmp_check(traj: GaitTrajectory) -> ZmpReference:
    return compute_zmp(traj.com, traj.params)


def n_steps_for(duration: float, p: RobotParams) -> int:
    return max(2, int(math.ceil(duration / p.step_duration_T - 1e-9)))


JOINT_SLEW_LIMIT = 0.1  # rad per sample at the default dt


def max_joint_step(joints: np.ndarray) -> float:
    """Largest absolute joint change between consecutive samples."""
    if len(joints) < 2:
        return 0.0
    return float(np.abs(np.diff(joints, axis=0)).max())
