"""Six-joint leg: forward chain and closed-form inverse.

Chain from the hip joint (x forward, y left, z up)::

    Rz(hip_yaw) Rx(hip_roll) Ry(hip_pitch) -> thigh down -> Ry(knee_pitch)
    -> shank down -> Ry(ankle_pitch) Rx(ankle_roll) -> ankle_height down

Positive knee pitch folds the shank backwards, so a bent knee points
forward. The same chain is used for both legs; mirrored targets give
mirrored joints (yaw and roll flip sign).
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .model_core import FrameTransform, RobotParams, Side, ValidationError, rot_x, rot_y, rot_z

JOINT_NAMES = ("hip_yaw", "hip_roll", "hip_pitch", "knee_pitch", "ankle_pitch", "ankle_roll")

# (lo, hi) for the left leg; the right leg mirrors yaw and roll.
LEFT_LIMITS = {
    "hip_yaw": (-0.9, 0.9),
    "hip_roll": (-0.4, 0.8),
    "hip_pitch": (-1.6, 0.5),
    "knee_pitch": (0.0, 2.1),
    "ankle_pitch": (-1.2, 0.9),
    "ankle_roll": (-0.8, 0.4),
}


def joint_limits(side: Side) -> dict[str, tuple[float, float]]:
    if side is Side.LEFT:
        return dict(LEFT_LIMITS)
    out = dict(LEFT_LIMITS)
    for name in ("hip_yaw", "hip_roll", "ankle_roll"):
        lo, hi = LEFT_LIMITS[name]
        out[name] = (-hi, -lo)
    return out


class UnreachableError(ValidationError):
    def __init__(self, required, lo, hi, side=None):
        where = f"{side.name.lower()} leg: " if side is not None else ""
        super().__init__(
            f"{where}hip-to-ankle distance {required:.6f} m outside reach [{lo:.6f}, {hi:.6f}] m")
        self.required = required
        self.side = side


class JointLimitError(ValidationError):
    pass


@dataclass(frozen=True)
class LegJoints:
    hip_yaw: float = 0.0
    hip_roll: float = 0.0
    hip_pitch: float = 0.0
    knee_pitch: float = 0.0
    ankle_pitch: float = 0.0
    ankle_roll: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self))

    def mirrored(self) -> "LegJoints":
        return LegJoints(-self.hip_yaw, -self.hip_roll, self.hip_pitch, self.knee_pitch,
                         self.ankle_pitch, -self.ankle_roll)

    def violations(self, side: Side, tol: float = 1e-9) -> list[str]:
        bad = []
        for name, (lo, hi) in joint_limits(side).items():
            v = getattr(self, name)
            if v < lo - tol or v > hi + tol:
                bad.append(f"{name}={v:.4f} not in [{lo}, {hi}]")
        return bad

    def check(self, side: Side) -> "LegJoints":
        bad = self.violations(side)
        if bad:
            raise JointLimitError(f"{side.name.lower()} leg: " + "; ".join(bad))
        return self


def leg_fk(j: LegJoints, side: Side, p: RobotParams, check_limits: bool = True) -> FrameTransform:
    """Sole frame in the hip frame."""
    if check_limits:
        j.check(side)
    R = rot_z(j.hip_yaw) @ rot_x(j.hip_roll) @ rot_y(j.hip_pitch)
    pos = R @ np.array([0.0, 0.0, -p.thigh_len])
    R = R @ rot_y(j.knee_pitch)
    pos = pos + R @ np.array([0.0, 0.0, -p.shank_len])
    R = R @ rot_y(j.ankle_pitch) @ rot_x(j.ankle_roll)
    pos = pos + R @ np.array([0.0, 0.0, -p.ankle_height])
    return FrameTransform.from_matrix(R, pos)


def leg_ik(target: FrameTransform, side: Side, p: RobotParams,
           check_limits: bool = False) -> LegJoints:
    """Closed-form inverse of :func:`leg_fk`, knee-forward branch."""
    thigh, shank = p.thigh_len, p.shank_len
    Rf = target.R
    ankle = target.p + Rf @ np.array([0.0, 0.0, p.ankle_height])
    # hip relative to ankle, in sole coordinates
    v = Rf.T @ (-ankle)
    D = float(np.linalg.norm(v))
    lo, hi = abs(thigh - shank), thigh + shank
    if D > hi * (1 + 1e-12) or D < lo * (1 - 1e-12):
        raise UnreachableError(D, lo, hi, side)
    cos_k = (D * D - thigh * thigh - shank * shank) / (2.0 * thigh * shank)
    knee = math.acos(min(1.0, max(-1.0, cos_k)))

    ux = -thigh * math.sin(knee)
    uz = shank + thigh * math.cos(knee)
    # two ankle-roll branches (hip above or below the ankle in sole coordinates);
    # keep the first that respects the joint limits
    candidates = []
    for sgn in (1.0, -1.0):
        ankle_roll = math.atan2(sgn * v[1], sgn * v[2])
        wz = sgn * math.hypot(v[1], v[2])
        ankle_pitch = _wrap(math.atan2(ux, uz) - math.atan2(v[0], wz))
        M = Rf @ rot_x(ankle_roll).T @ rot_y(knee + ankle_pitch).T
        # M = Rz(yaw) Rx(roll) Ry(pitch)
        hip_roll = math.asin(min(1.0, max(-1.0, M[2, 1])))
        hip_pitch = math.atan2(-M[2, 0], M[2, 2])
        hip_yaw = math.atan2(-M[0, 1], M[1, 1])
        j = LegJoints(hip_yaw, hip_roll, hip_pitch, knee, ankle_pitch, ankle_roll)
        if not j.violations(side):
            return j
        candidates.append(j)
    j = candidates[0]
    if check_limits:
        j.check(side)
    return j


def _wrap(a):
    return math.remainder(a, 2.0 * math.pi)


def hip_frame(side: Side, p: RobotParams) -> FrameTransform:
    """Hip joint in the CoM frame."""
    return FrameTransform((0.0, side.sign * p.hip_offset_y, 0.0))


class LowerBodyIKError(ValidationError):
    """One or both legs failed; ``errors`` maps side to the per-leg error."""

    def __init__(self, errors: dict):
        super().__init__("; ".join(str(e) for e in errors.values()))
        self.errors = errors


def lower_body_ik(left: FrameTransform, right: FrameTransform, p: RobotParams,
                  check_limits: bool = False) -> tuple[LegJoints, LegJoints]:
    """Both legs from feet expressed in the CoM frame."""
    out = {}
    errors = {}
    for side, foot in ((Side.LEFT, left), (Side.RIGHT, right)):
        local = hip_frame(side, p).inverse().compose(foot)
        try:
            out[side] = leg_ik(local, side, p, check_limits=check_limits)
        except ValidationError as exc:
            errors[side] = exc
    if errors:
        raise LowerBodyIKError(errors)
    return out[Side.LEFT], out[Side.RIGHT]
