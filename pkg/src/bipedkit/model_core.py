"""Shared domain types for the gait stack.

Every quantity is SI: metres, seconds, radians, kilograms. All types are
frozen value objects; array-valued fields are stored read-only.
"""
from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

# g + z'' must stay above this (m/s^2) or the ZMP expression blows up.
SINGULARITY_EPS = 1e-3


class ValidationError(ValueError):
    """Input violates a documented invariant."""


class NumericError(ArithmeticError):
    """A numeric routine could not produce a trustworthy answer."""


class SingularityError(NumericError):
    def __init__(self, index, value):
        super().__init__(f"g + az = {value:.3e} <= {SINGULARITY_EPS} at sample {index}")
        self.index = index


class Side(str, enum.Enum):
    LEFT = "L"
    RIGHT = "R"

    @property
    def other(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT

    @property
    def sign(self) -> float:
        """+1 for the left foot (positive y), -1 for the right."""
        return 1.0 if self is Side.LEFT else -1.0


def wrap_angle(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    r = math.remainder(a, 2.0 * math.pi)
    return math.pi if r == -math.pi else r


def rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rpy_to_matrix(roll, pitch, yaw):
    """Fixed-axis X-Y-Z: roll about x first, then pitch about y, then yaw about z."""
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def matrix_to_rpy(R):
    pitch = math.atan2(-R[2, 0], math.hypot(R[0, 0], R[1, 0]))
    roll = math.atan2(R[2, 1], R[2, 2])
    yaw = math.atan2(R[1, 0], R[0, 0])
    return roll, pitch, yaw


# ---------------------------------------------------------------------------
# Robot description
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RobotParams:
    """Physical constants and gait limits. Defaults are NAO-sized."""

    mass_M: float = 5.0
    gravity_g: float = 9.81
    thigh_len: float = 0.14
    shank_len: float = 0.14
    hip_offset_y: float = 0.05
    ankle_height: float = 0.04
    nominal_com_height_h: float = 0.30
    foot_length: float = 0.16
    foot_width: float = 0.08
    max_step_len: float = 0.10
    max_step_width: float = 0.05
    max_step_yaw: float = 0.30
    step_duration_T: float = 0.5
    double_support_ratio: float = 0.2
    dt: float = 0.01

    @property
    def leg_reach(self) -> float:
        """Hip to sole with the knee straight."""
        return self.thigh_len + self.shank_len + self.ankle_height

    @property
    def omega0_sq(self) -> float:
        return self.gravity_g / self.nominal_com_height_h

    def replace(self, **changes) -> "RobotParams":
        return dataclasses.replace(self, **changes)


_POSITIVE = (
    "mass_M", "gravity_g", "thigh_len", "shank_len", "hip_offset_y", "ankle_height",
    "nominal_com_height_h", "foot_length", "foot_width", "max_step_len",
    "max_step_width", "max_step_yaw", "step_duration_T", "dt",
)


def validate_params(p: RobotParams) -> RobotParams:
    """Return ``p`` unchanged, or raise on the first violated invariant."""
    for name in _POSITIVE:
        v = getattr(p, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ValidationError(f"{name} must be positive (got {v!r})")
    if not p.nominal_com_height_h < p.leg_reach:
        raise ValidationError(
            f"com height unreachable: nominal_com_height_h={p.nominal_com_height_h} "
            f">= thigh+shank+ankle={p.leg_reach}"
        )
    if not 0.0 <= p.double_support_ratio <= 0.5:
        raise ValidationError(
            f"double_support_ratio must lie in [0, 0.5] (got {p.double_support_ratio})"
        )
    return p


@dataclass(frozen=True)
class BalanceConfig:
    """Active-balance gains and the simulator's trunk-tilt proxy gain."""

    kp: float = 0.5
    kd: float = 0.02
    ki: float = 0.0  # reserved, always 0 in this PD controller
    max_correction: float = 0.35
    tilt_gain: float = 2.0  # rad of synthetic trunk tilt per metre of CoM error


def load_config(path) -> tuple[RobotParams, BalanceConfig]:
    """Read a robot JSON file. Keys are the field names of ``RobotParams``,
    plus an optional ``"balance"`` object with ``BalanceConfig`` fields."""
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: top level must be an object")
    raw = dict(raw)
    bal_raw = raw.pop("balance", {})
    known = {f.name for f in fields(RobotParams)}
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"{path}: unknown keys {sorted(unknown)}")
    bal_known = {f.name for f in fields(BalanceConfig)}
    if set(bal_raw) - bal_known:
        raise ValidationError(f"{path}: unknown balance keys {sorted(set(bal_raw) - bal_known)}")
    params = validate_params(RobotParams(**{k: float(v) for k, v in raw.items()}))
    return params, BalanceConfig(**{k: float(v) for k, v in bal_raw.items()})


def load_params(path) -> RobotParams:
    return load_config(path)[0]


def dump_config(path, params: RobotParams, balance: BalanceConfig | None = None) -> None:
    out = dataclasses.asdict(params)
    if balance is not None:
        out["balance"] = dataclasses.asdict(balance)
    Path(path).write_text(json.dumps(out, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Gait data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaitCommand:
    vx: float = 0.0
    vy: float = 0.0
    omega: float = 0.0

    def mirrored(self) -> "GaitCommand":
        return GaitCommand(self.vx, -self.vy, -self.omega)


def command_limits(p: RobotParams) -> GaitCommand:
    T = p.step_duration_T
    return GaitCommand(p.max_step_len / T, p.max_step_width / T, p.max_step_yaw / T)


@dataclass(frozen=True)
class Footstep:
    pos_x: float
    pos_y: float
    yaw: float
    side: Side
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValidationError(f"footstep t_end {self.t_end} <= t_start {self.t_start}")

    @property
    def frame(self) -> "FrameTransform":
        return FrameTransform((self.pos_x, self.pos_y, 0.0), (0.0, 0.0, self.yaw))


def _frozen_array(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ZmpReference:
    dt: float
    px: np.ndarray
    py: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "px", _frozen_array(self.px))
        object.__setattr__(self, "py", _frozen_array(self.py))
        if self.px.ndim != 1 or self.px.shape != self.py.shape or len(self.px) == 0:
            raise ValidationError("ZMP reference needs two equal-length nonempty 1-D arrays")
        if not self.dt > 0:
            raise ValidationError("dt must be positive")

    def __len__(self):
        return len(self.px)

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self.px)) * self.dt

    @property
    def samples(self) -> np.ndarray:
        return np.column_stack([self.px, self.py])

    def __eq__(self, other):
        if not isinstance(other, ZmpReference):
            return NotImplemented
        return (self.dt == other.dt and np.array_equal(self.px, other.px)
                and np.array_equal(self.py, other.py))

    __hash__ = None


@dataclass(frozen=True)
class ComTrajectory:
    dt: float
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    ax: np.ndarray
    ay: np.ndarray
    az: np.ndarray
    g: float = 9.81

    _COLS = ("x", "y", "z", "ax", "ay", "az")

    def __post_init__(self):
        n = None
        for name in self._COLS:
            arr = _frozen_array(getattr(self, name))
            object.__setattr__(self, name, arr)
            if arr.ndim != 1:
                raise ValidationError(f"{name} must be 1-D")
            if n is None:
                n = len(arr)
            elif len(arr) != n:
                raise ValidationError("CoM trajectory columns differ in length")
        if not np.all(self.z > 0):
            raise ValidationError("CoM height must be positive at every sample")
        bad = np.flatnonzero(self.g + self.az <= SINGULARITY_EPS)
        if bad.size:
            raise SingularityError(int(bad[0]), float(self.g + self.az[bad[0]]))

    def __len__(self):
        return len(self.x)

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self.x)) * self.dt

    def columns(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self._COLS}

    def sample(self, i: int) -> tuple[float, ...]:
        return tuple(float(getattr(self, name)[i]) for name in self._COLS)

    def __eq__(self, other):
        if not isinstance(other, ComTrajectory):
            return NotImplemented
        return (self.dt == other.dt and self.g == other.g and all(
            np.array_equal(getattr(self, c), getattr(other, c)) for c in self._COLS))

    __hash__ = None


@dataclass(frozen=True)
class FrameTransform:
    """Rigid transform; rotation is fixed-axis roll-pitch-yaw."""

    translation: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rotation: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        t = tuple(float(v) for v in self.translation)
        r = tuple(wrap_angle(float(v)) for v in self.rotation)
        if len(t) != 3 or len(r) != 3:
            raise ValidationError("translation and rotation need three components")
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", r)

    @classmethod
    def identity(cls) -> "FrameTransform":
        return cls()

    @classmethod
    def from_matrix(cls, R, t) -> "FrameTransform":
        return cls(tuple(np.asarray(t, dtype=float)), matrix_to_rpy(np.asarray(R)))

    @property
    def R(self) -> np.ndarray:
        return rpy_to_matrix(*self.rotation)

    @property
    def p(self) -> np.ndarray:
        return np.array(self.translation)

    @property
    def yaw(self) -> float:
        return self.rotation[2]

    def homogeneous(self) -> np.ndarray:
        H = np.eye(4)
        H[:3, :3] = self.R
        H[:3, 3] = self.translation
        return H

    def compose(self, other: "FrameTransform") -> "FrameTransform":
        """``self * other``: express ``other`` (given in self's frame) in self's parent."""
        R = self.R
        return FrameTransform.from_matrix(R @ other.R, R @ other.p + self.p)

    __matmul__ = compose

    def inverse(self) -> "FrameTransform":
        Rt = self.R.T
        return FrameTransform.from_matrix(Rt, -Rt @ self.p)

    def apply(self, point) -> np.ndarray:
        return self.R @ np.asarray(point, dtype=float) + self.p

    def allclose(self, other: "FrameTransform", atol=1e-9) -> bool:
        return (np.allclose(self.p, other.p, atol=atol, rtol=0)
                and np.allclose(self.R, other.R, atol=atol, rtol=0))


@dataclass(frozen=True)
class BalanceState:
    trunk_pitch_meas: float = 0.0
    trunk_roll_meas: float = 0.0
    trunk_pitch_des: float = 0.0
    trunk_roll_des: float = 0.0
    kp: float = 0.5
    kd: float = 0.02
    prev_pitch_err: float = 0.0
    prev_roll_err: float = 0.0
    max_correction: float = 0.35
    ki: float = field(default=0.0)

    def __post_init__(self):
        if self.kp < 0 or self.kd < 0:
            raise ValidationError("balance gains must be non-negative")
        if self.max_correction < 0:
            raise ValidationError("max_correction must be non-negative")

    @classmethod
    def from_config(cls, cfg: BalanceConfig) -> "BalanceState":
        return cls(kp=cfg.kp, kd=cfg.kd, ki=cfg.ki, max_correction=cfg.max_correction)

    def measured(self, pitch: float, roll: float) -> "BalanceState":
        return dataclasses.replace(self, trunk_pitch_meas=pitch, trunk_roll_meas=roll)


DEFAULT_CONFIG_PATH = Path(__file__).parent / "data" / "robot_default.json"
