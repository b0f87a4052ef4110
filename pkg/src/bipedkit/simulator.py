"""Point-mass LIPM verification simulator with support-polygon fall checks.

The plant integrates ``x'' = (g + z'')/z * (x - p)`` exactly over each
control period with ``p`` held constant. The commanded ZMP ``p`` is the
reference plus a divergent-component feedback term, actuator noise, and,
when enabled, the support-foot shift produced by the active-balance
controller. Trunk tilt is synthesised from CoM tracking error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .com_solver import zmp_from_com
from .kinematics import lower_body_ik
from .model_core import (
    BalanceConfig,
    BalanceState,
    GaitCommand,
    RobotParams,
    Side,
    ValidationError,
)
from .pipeline import PipelineError, generate_gait, joints_row, n_steps_for
from .support import support_polygon, zmp_margin
from .swing_balance import active_balance, balance_angles
from .zmp_planner import support_feet


@dataclass(frozen=True)
class Disturbance:
    t: float
    dvx: float
    dvy: float = 0.0


@dataclass(frozen=True)
class SimConfig:
    dcm_gain: float = 1.5  # ZMP feedback on divergent-component error
    noise_std: float = 5e-4  # m, actuator noise on the commanded ZMP
    foot_tolerance: float = 0.0  # fall when margin < -tolerance ...
    fall_samples: int = 3  # ... for this many consecutive samples
    step_height: float = 0.04
    check_limits: bool = True


LOG_FIELDS = ("t", "com_x", "com_y", "com_z", "com_vx", "com_vy", "zmp_x", "zmp_y",
              "zmp_ref_x", "zmp_ref_y", "support", "margin", "balance_pitch", "balance_roll",
              "trunk_pitch", "trunk_roll", "fallen")


@dataclass
class SimLog:
    """Per-sample records; ``support`` is ``"L"``, ``"R"`` or ``"LR"``."""

    dt: float
    columns: dict = field(default_factory=dict)
    joints: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.columns:
            self.columns = {k: np.zeros(0) for k in LOG_FIELDS}
            self.columns["support"] = np.array([], dtype=object)
        n = {len(v) for v in self.columns.values()}
        if len(n) > 1:
            raise ValidationError("log columns differ in length")
        t = self.columns["t"]
        if len(t) > 1 and not np.allclose(np.diff(t), self.dt, atol=1e-12, rtol=0):
            raise ValidationError("log time must advance by dt")

    def __len__(self):
        return len(self.columns["t"])

    def __getitem__(self, key):
        return self.columns[key]

    @property
    def fallen(self) -> bool:
        return bool(len(self) and self.columns["fallen"][-1])

    @property
    def min_margin(self) -> float:
        return float(np.min(self.columns["margin"])) if len(self) else math.nan

    def trunk_error(self, t0: float, window: float) -> float:
        """Mean trunk-proxy tilt magnitude over ``[t0, t0 + window)``."""
        t = self.columns["t"]
        m = (t >= t0 - 1e-12) & (t < t0 + window - 1e-12)
        if not np.any(m):
            raise ValidationError("empty trunk-error window")
        return float(np.mean(np.hypot(self.columns["trunk_pitch"][m], self.columns["trunk_roll"][m])))

    def __eq__(self, other):
        if not isinstance(other, SimLog) or self.dt != other.dt or len(self) != len(other):
            return NotImplemented if not isinstance(other, SimLog) else False
        same = all(np.array_equal(self.columns[k], other.columns[k]) for k in LOG_FIELDS)
        if (self.joints is None) != (other.joints is None):
            return False
        return same and (self.joints is None or np.array_equal(self.joints, other.joints))


def _lipm_step(x, v, p, w, dt):
    c, s = math.cosh(w * dt), math.sinh(w * dt)
    return p + (x - p) * c + v / w * s, (x - p) * w * s + v * c


def simulate_walk(cmd: GaitCommand, p: RobotParams, solver: str = "pendulum",
                  disturbances: Sequence[Disturbance | tuple] = (), balance_on: bool = True,
                  duration: float = 10.0, seed: int = 0,
                  balance: BalanceConfig | None = None,
                  config: SimConfig | None = None, with_joints: bool = True) -> SimLog:
    """Run the gait pipeline and close the loop on a point-mass plant."""
    cfg = config or SimConfig()
    bcfg = balance or BalanceConfig()
    if not duration > 0:
        raise ValidationError("duration must be positive")
    dist = sorted((d if isinstance(d, Disturbance) else Disturbance(*d) for d in disturbances),
                  key=lambda d: d.t)
    n = int(round(duration / p.dt))
    traj = generate_gait(cmd, p, n_steps_for(duration, p), solver=solver,
                         step_height=cfg.step_height, with_joints=False)
    com = traj.com
    vel = traj.com_velocity()
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, cfg.noise_std, size=(n, 2)) if cfg.noise_std > 0 else np.zeros((n, 2))

    cols = {k: np.zeros(n) for k in LOG_FIELDS}
    cols["support"] = np.empty(n, dtype=object)
    cols["fallen"] = np.zeros(n, dtype=bool)
    joints = np.zeros((n, 12)) if with_joints else None

    state = BalanceState.from_config(bcfg)
    x = np.array([com.x[0], com.y[0]])
    v = vel[0].copy()
    di, out_run, fallen = 0, 0, False
    for k in range(n):
        t = k * p.dt
        while di < len(dist) and dist[di].t <= t + 1e-12:
            v = v + (dist[di].dvx, dist[di].dvy)
            di += 1
        z, az = com.z[k], com.az[k]
        g = p.gravity_g
        w = math.sqrt((g + az) / z)
        yaw = traj.com_yaw[k]
        c, s = math.cos(yaw), math.sin(yaw)
        err = x - (com.x[k], com.y[k])
        e_fwd, e_lat = c * err[0] + s * err[1], -s * err[0] + c * err[1]
        trunk_pitch, trunk_roll = bcfg.tilt_gain * e_fwd, -bcfg.tilt_gain * e_lat

        ph = traj.plan.phase(t, p.double_support_ratio)
        feet = support_feet(ph)
        left, right = traj.feet_in_com(k)
        shift = np.zeros(2)
        pitch_ang = roll_ang = 0.0
        if balance_on:
            state = state.measured(trunk_pitch, trunk_roll)
            pitch_ang, roll_ang, _, _ = balance_angles(state, p.dt)
            bl, br, state = active_balance((left, right), state, p.dt)
            grounded = [sd for sd, _ in feet]
            d = np.mean([(bl if sd is Side.LEFT else br).p[:2] - (left if sd is Side.LEFT else right).p[:2]
                         for sd in grounded], axis=0)
            shift = np.array([c * d[0] - s * d[1], s * d[0] + c * d[1]])
            left, right = bl, br
        if with_joints:
            try:
                joints[k] = joints_row(*lower_body_ik(left, right, p, check_limits=cfg.check_limits))
            except (ValidationError, ArithmeticError) as exc:
                raise PipelineError("ik", exc) from exc

        dcm_err = err + (v - vel[k]) / w
        p_ref = np.array([traj.zmp.px[k], traj.zmp.py[k]])
        p_cmd = p_ref + cfg.dcm_gain * dcm_err + shift + noise[k]

        # ZMP of the integrated state via the cart-table relation
        acc = w * w * (x - p_cmd)
        zmp = np.array([zmp_from_com(x[0], acc[0], z, az, g), zmp_from_com(x[1], acc[1], z, az, g)])

        poly = support_polygon([f for _, f in feet], p)
        margin = zmp_margin(zmp, poly)
        out_run = out_run + 1 if margin < -cfg.foot_tolerance else 0
        fallen = fallen or out_run >= cfg.fall_samples

        cols["t"][k] = t
        cols["com_x"][k], cols["com_y"][k], cols["com_z"][k] = x[0], x[1], z
        cols["com_vx"][k], cols["com_vy"][k] = v
        cols["zmp_x"][k], cols["zmp_y"][k] = zmp
        cols["zmp_ref_x"][k], cols["zmp_ref_y"][k] = p_ref
        cols["support"][k] = "LR" if len(feet) == 2 else feet[0][0].value
        cols["margin"][k] = margin
        cols["balance_pitch"][k], cols["balance_roll"][k] = pitch_ang, roll_ang
        cols["trunk_pitch"][k], cols["trunk_roll"][k] = trunk_pitch, trunk_roll
        cols["fallen"][k] = fallen

        xs, vs = _lipm_step(x[0], v[0], p_cmd[0], w, p.dt)
        ys, vys = _lipm_step(x[1], v[1], p_cmd[1], w, p.dt)
        x, v = np.array([xs, ys]), np.array([vs, vys])

    meta = {"cmd": [cmd.vx, cmd.vy, cmd.omega], "solver": solver, "balance_on": balance_on,
            "seed": seed, "duration": duration,
            "disturbances": [[d.t, d.dvx, d.dvy] for d in dist]}
    return SimLog(p.dt, cols, joints, meta)
