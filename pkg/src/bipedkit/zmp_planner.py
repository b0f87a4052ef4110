"""Velocity command -> footsteps -> sampled ZMP reference -> CoM height profile.

Timing model: the plan is ``n_steps`` intervals of length ``T``. During
interval ``i`` the foot ``steps[i].side`` swings and lands on
``steps[i]``; the other foot supports. A double-support window of width
``double_support_ratio * T`` is centred on every interior step exchange;
inside it the ZMP moves linearly from the old to the new support foot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model_core import (
    Footstep,
    FrameTransform,
    GaitCommand,
    RobotParams,
    Side,
    ValidationError,
    ZmpReference,
    _frozen_array,
    wrap_angle,
)


class StepLimitError(ValidationError):
    def __init__(self, axis, value, limit):
        super().__init__(f"step {axis} {value:.6g} exceeds limit {limit:.6g}")
        self.axis = axis


class ReachError(ValidationError):
    def __init__(self, index, d, reach):
        super().__init__(f"sample {index}: hip-to-foot distance {d:.4f} m >= leg reach {reach:.4f} m")
        self.index = index


def default_stance(p: RobotParams) -> tuple[FrameTransform, FrameTransform]:
    """Feet side by side under the hips, robot at the origin facing +x."""
    return (FrameTransform((0.0, p.hip_offset_y, 0.0)), FrameTransform((0.0, -p.hip_offset_y, 0.0)))


@dataclass(frozen=True)
class PhaseInfo:
    """Where the plan is at one instant."""

    interval: int
    support_side: Side
    support: FrameTransform
    double_support: bool
    ds_alpha: float  # 0..1 progress of the ZMP ramp, 0 in single support
    next_support: Optional[FrameTransform]  # landing foot during double support
    swing_side: Side
    swing_from: FrameTransform
    swing_to: FrameTransform
    swing_phase: float  # 0 before lift-off, 1 after touchdown


@dataclass(frozen=True)
class FootstepPlan:
    steps: tuple[Footstep, ...]
    initial_stance: tuple[FrameTransform, FrameTransform]  # (left, right)

    def __post_init__(self):
        steps = tuple(self.steps)
        object.__setattr__(self, "steps", steps)
        if not steps:
            raise ValidationError("empty footstep plan")
        for a, b in zip(steps, steps[1:]):
            if b.side is a.side:
                raise ValidationError("footstep sides must alternate")
            if b.t_start != a.t_end:
                raise ValidationError("footsteps must be contiguous in time")

    @property
    def duration(self) -> float:
        return self.steps[-1].t_end - self.steps[0].t_start

    @property
    def step_duration(self) -> float:
        return self.steps[0].t_end - self.steps[0].t_start

    def n_samples(self, dt: float) -> int:
        return int(round(self.duration / dt))

    def stance(self, side: Side) -> FrameTransform:
        return self.initial_stance[0] if side is Side.LEFT else self.initial_stance[1]

    def support_frame(self, i: int) -> FrameTransform:
        """Support foot during interval ``i``."""
        if i == 0:
            return self.stance(self.steps[0].side.other)
        return self.steps[i - 1].frame

    def swing_endpoints(self, i: int) -> tuple[FrameTransform, FrameTransform]:
        side = self.steps[i].side
        start = self.stance(side) if i < 2 else self.steps[i - 2].frame
        return start, self.steps[i].frame

    def mirrored(self) -> "FootstepPlan":
        """Reflection about the x-axis (sides swap)."""
        left, right = self.initial_stance
        return FootstepPlan(
            tuple(Footstep(s.pos_x, -s.pos_y, -s.yaw, s.side.other, s.t_start, s.t_end)
                  for s in self.steps),
            (_mirror_frame(right), _mirror_frame(left)),
        )

    def phase(self, t: float, double_support_ratio: float) -> PhaseInfo:
        n = len(self.steps)
        T = self.step_duration
        t0 = self.steps[0].t_start
        tau = t - t0
        if tau < -1e-9 or tau > self.duration + 1e-9:
            raise ValidationError(f"t={t} outside plan [{t0}, {t0 + self.duration}]")
        i = min(max(int(math.floor(tau / T + 1e-9)), 0), n - 1)
        half = 0.5 * double_support_ratio * T
        j = int(round(tau / T))
        ds = half > 0 and 1 <= j <= n - 1 and abs(tau - j * T) < half
        alpha = (tau - (j * T - half)) / (2 * half) if ds else 0.0

        ws = i * T + (half if i > 0 else 0.0)
        we = (i + 1) * T - (half if i < n - 1 else 0.0)
        sphase = min(max((tau - ws) / (we - ws), 0.0), 1.0)
        sfrom, sto = self.swing_endpoints(i)
        if ds:
            # ramp from support(j-1) to support(j) = steps[j-1]
            return PhaseInfo(i, self.steps[j - 1].side.other, self.support_frame(j - 1), True,
                             alpha, self.support_frame(j), self.steps[i].side,
                             sfrom, sto, sphase)
        return PhaseInfo(i, self.steps[i].side.other, self.support_frame(i), False, 0.0, None,
                         self.steps[i].side, sfrom, sto, sphase)


def _mirror_frame(f: FrameTransform) -> FrameTransform:
    x, y, z = f.translation
    r, p, yw = f.rotation
    return FrameTransform((x, -y, z), (-r, p, -yw))


def plan_footsteps(cmd: GaitCommand, p: RobotParams, n_steps: int,
                   stance: Optional[tuple[FrameTransform, FrameTransform]] = None,
                   clamp: bool = True, first_side: Optional[Side] = None) -> FootstepPlan:
    """Place ``n_steps`` alternating footsteps for a constant velocity command.

    Each step moves the body frame by ``(vx*T, vy*T)`` in its current
    heading and turns it by ``omega*T``; the swing foot lands at
    ``+-hip_offset_y`` from the new body frame. With ``clamp`` the per-step
    displacement is saturated at the ``max_step_*`` limits, otherwise an
    over-limit command raises :class:`StepLimitError`.
    """
    if n_steps < 2:
        raise ValidationError("n_steps must be at least 2")
    T = p.step_duration_T
    deltas = {"x": cmd.vx * T, "y": cmd.vy * T, "yaw": cmd.omega * T}
    limits = {"x": p.max_step_len, "y": p.max_step_width, "yaw": p.max_step_yaw}
    for axis, v in deltas.items():
        lim = limits[axis]
        if abs(v) > lim * (1 + 1e-12):
            if not clamp:
                raise StepLimitError(axis, v, lim)
            deltas[axis] = math.copysign(lim, v)

    if stance is None:
        stance = default_stance(p)
    left, right = stance
    if first_side is None:
        lead = cmd.vy if cmd.vy != 0 else cmd.omega
        first_side = Side.RIGHT if lead < 0 else Side.LEFT

    bx = 0.5 * (left.translation[0] + right.translation[0])
    by = 0.5 * (left.translation[1] + right.translation[1])
    yaw = _mean_angle(left.yaw, right.yaw)
    steps = []
    side = first_side
    for i in range(n_steps):
        c, s = math.cos(yaw), math.sin(yaw)
        bx += c * deltas["x"] - s * deltas["y"]
        by += s * deltas["x"] + c * deltas["y"]
        yaw = wrap_angle(yaw + deltas["yaw"])
        c, s = math.cos(yaw), math.sin(yaw)
        off = side.sign * p.hip_offset_y
        steps.append(Footstep(bx - s * off, by + c * off, yaw, side, i * T, (i + 1) * T))
        side = side.other
    return FootstepPlan(tuple(steps), (left, right))


def _mean_angle(a: float, b: float) -> float:
    return wrap_angle(a + 0.5 * wrap_angle(b - a))


def generate_zmp_reference(plan: FootstepPlan, p: RobotParams) -> ZmpReference:
    """Sample the piecewise constant + linear-ramp ZMP at ``p.dt``."""
    n = plan.n_samples(p.dt)
    px = np.empty(n)
    py = np.empty(n)
    t0 = plan.steps[0].t_start
    for k in range(n):
        ph = plan.phase(t0 + k * p.dt, p.double_support_ratio)
        c = ph.support.p[:2]
        if ph.double_support:
            c = (1.0 - ph.ds_alpha) * c + ph.ds_alpha * ph.next_support.p[:2]
        px[k], py[k] = c
    return ZmpReference(p.dt, px, py)


@dataclass(frozen=True)
class HeightProfile:
    dt: float
    z_samples: np.ndarray
    az_samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z_samples", _frozen_array(self.z_samples))
        object.__setattr__(self, "az_samples", _frozen_array(self.az_samples))
        if not np.all(self.z_samples > 0):
            raise ValidationError("height profile must stay positive")
        if self.z_samples.shape != self.az_samples.shape:
            raise ValidationError("z and az lengths differ")

    def __len__(self):
        return len(self.z_samples)

    @classmethod
    def from_heights(cls, z, dt) -> "HeightProfile":
        return cls(dt, z, second_difference(z, dt))

    @classmethod
    def constant(cls, h: float, n: int, dt: float) -> "HeightProfile":
        return cls(dt, np.full(n, float(h)), np.zeros(n))


def second_difference(v, dt) -> np.ndarray:
    """Central second difference; the end samples reuse their neighbour's stencil."""
    v = np.asarray(v, dtype=float)
    if len(v) < 3:
        return np.zeros_like(v)
    a = np.empty_like(v)
    a[1:-1] = (v[:-2] - 2.0 * v[1:-1] + v[2:]) / dt**2
    a[0] = a[1]
    a[-1] = a[-2]
    return a


def support_feet(ph: PhaseInfo) -> list[tuple[Side, FrameTransform]]:
    """Feet on the ground at this phase (the swing foot is excluded)."""
    feet = [(ph.support_side, ph.support)]
    if ph.double_support:
        feet.append((ph.support_side.other, ph.next_support))
    return feet


def compute_height_profile(plan: FootstepPlan, com_xy, p: RobotParams,
                           margin: float = 0.01) -> HeightProfile:
    """Lower the CoM where the supporting leg would otherwise over-extend.

    ``d`` is the horizontal distance between a grounded foot and its hip,
    the hip sitting ``hip_offset_y`` sideways from the CoM projection in
    the foot's heading. In double support both legs must reach.
    """
    com_xy = np.asarray(com_xy, dtype=float)
    n = plan.n_samples(p.dt)
    if com_xy.shape != (n, 2):
        raise ValidationError(f"com_xy must have shape ({n}, 2), got {com_xy.shape}")
    L = p.leg_reach
    h = p.nominal_com_height_h
    z = np.empty(n)
    t0 = plan.steps[0].t_start
    for k in range(n):
        ph = plan.phase(t0 + k * p.dt, p.double_support_ratio)
        zk = h
        for side, foot in support_feet(ph):
            yaw = foot.yaw
            off = side.sign * p.hip_offset_y
            hx = com_xy[k, 0] - math.sin(yaw) * off
            hy = com_xy[k, 1] + math.cos(yaw) * off
            d = math.hypot(hx - foot.translation[0], hy - foot.translation[1])
            if d >= L:
                raise ReachError(k, d, L)
            zk = min(zk, math.sqrt(L * L - d * d) - margin)
        z[k] = zk
    return HeightProfile.from_heights(z, p.dt)
