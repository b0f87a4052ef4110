"""Cycloid swing foot, feet expressed in the CoM frame, trunk-angle balance."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .model_core import (
    BalanceState,
    FrameTransform,
    Side,
    ValidationError,
    rot_x,
    rot_y,
    wrap_angle,
)
from .zmp_planner import FootstepPlan


@dataclass(frozen=True)
class SwingSpec:
    start: FrameTransform
    end: FrameTransform
    step_height_H: float
    duration: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValidationError("swing duration must be positive")
        if self.step_height_H < 0:
            raise ValidationError("step height must be non-negative")
        if self.start.translation[2] != self.end.translation[2]:
            raise ValidationError("swing endpoints must be at the same ground level")


def cycloid_profile(t: float) -> tuple[float, float]:
    """Horizontal progress (0..1) and lift fraction (0..1..0) at phase ``t``."""
    theta = 2.0 * math.pi * t
    return (theta - math.sin(theta)) / (2.0 * math.pi), 0.5 * (1.0 - math.cos(theta))


def swing_pose(spec: SwingSpec, t: float) -> FrameTransform:
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"swing phase {t} outside [0, 1]")
    s, lift = cycloid_profile(t)
    a, b = spec.start, spec.end
    xyz = [(1.0 - s) * pa + s * pb for pa, pb in zip(a.translation, b.translation)]
    xyz[2] += spec.step_height_H * lift
    rpy = [ra + s * wrap_angle(rb - ra) for ra, rb in zip(a.rotation, b.rotation)]
    if s == 1.0:
        rpy = list(b.rotation)
    return FrameTransform(tuple(xyz), tuple(rpy))


def com_frame(x, y, z, yaw) -> FrameTransform:
    """World pose of the CoM frame: origin at the CoM, z up, heading ``yaw``."""
    return FrameTransform((x, y, z), (0.0, 0.0, yaw))


def feet_world(plan: FootstepPlan, t: float, double_support_ratio: float,
               step_height: float = 0.04) -> dict[Side, FrameTransform]:
    """Planned world frames of both feet at time ``t``.

    The swing foot sits on its lift-off pose before the swing window and on
    its landing pose after it, so in double support both feet are exactly
    where the plan put them.
    """
    ph = plan.phase(t, double_support_ratio)
    T = plan.step_duration
    spec = SwingSpec(ph.swing_from, ph.swing_to, step_height, T * (1.0 - double_support_ratio))
    return {ph.swing_side: swing_pose(spec, ph.swing_phase),
            ph.swing_side.other: plan.support_frame(ph.interval)}


def compute_feet_frames(com_xyz, com_yaw: float, plan: FootstepPlan, t: float,
                        double_support_ratio: float, step_height: float = 0.04,
                        ) -> tuple[FrameTransform, FrameTransform]:
    """(left, right) foot frames expressed in the CoM frame at time ``t``."""
    duration = plan.duration
    t0 = plan.steps[0].t_start
    if t < t0 - 1e-9 or t > t0 + duration + 1e-9:
        raise ValidationError(f"t={t} outside plan")
    feet = feet_world(plan, t, double_support_ratio, step_height)
    inv = com_frame(*com_xyz, com_yaw).inverse()
    return inv.compose(feet[Side.LEFT]), inv.compose(feet[Side.RIGHT])


def balance_rotation(pitch: float, roll: float) -> np.ndarray:
    """Rotation of the balance frame: about y by ``pitch``, then about x by ``roll``."""
    return rot_x(roll) @ rot_y(pitch)


def balance_angles(state: BalanceState, dt: float) -> tuple[float, float, float, float]:
    """PD output (pitchAng, rollAng) and the current errors."""
    if not dt > 0:
        raise ValidationError("dt must be positive")
    pe = state.trunk_pitch_meas - state.trunk_pitch_des
    re = state.trunk_roll_meas - state.trunk_roll_des
    lim = state.max_correction
    pitch = state.kp * pe + state.kd * (pe - state.prev_pitch_err) / dt
    roll = state.kp * re + state.kd * (re - state.prev_roll_err) / dt
    return min(max(pitch, -lim), lim), min(max(roll, -lim), lim), pe, re


def active_balance(feet: tuple[FrameTransform, FrameTransform], state: BalanceState,
                   dt: float) -> tuple[FrameTransform, FrameTransform, BalanceState]:
    """Re-express both feet in the tilted CoM frame.

    The frame is rotated by the PD output; foot positions are taken in the
    rotated frame (``R^T p``) while the soles keep their orientation, so
    they stay parallel to the ground.
    """
    pitch, roll, pe, re = balance_angles(state, dt)
    new_state = dataclasses.replace(state, prev_pitch_err=pe, prev_roll_err=re)
    if pitch == 0.0 and roll == 0.0:
        return feet[0], feet[1], new_state
    Rt = balance_rotation(pitch, roll).T
    out = tuple(FrameTransform(tuple(Rt @ f.p), f.rotation) for f in feet)
    return out[0], out[1], new_state


def heading_of(feet: dict[Side, FrameTransform]) -> float:
    a, b = feet[Side.LEFT].yaw, feet[Side.RIGHT].yaw
    return wrap_angle(a + 0.5 * wrap_angle(b - a))

