"""Observation vector for the learned running skills.

Layout (80 values): counter, z, orientation, gyro(3), accel(3),
feet_force(12: left fx fy fz tx ty tz, then right), joints(20), followed
by time derivatives of orientation, gyro, accel, feet_force and joints in
the same order. The counter and z are not differentiated.
"""
from __future__ import annotations

import csv
import hashlib
import itertools
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .model_core import ValidationError

BLOCK_SIZES = {
    "orientation": 1, "gyro": 3, "accel": 3, "feet_force": 12, "joints": 20,
}
DIFFERENTIATED = ("orientation", "gyro", "accel", "feet_force", "joints")
VISUAL_PERIOD = 3  # control steps per visual update


def _names(block: str, n: int) -> list[str]:
    if n == 1:
        return [block]
    if block in ("gyro", "accel"):
        return [f"{block}_{a}" for a in "xyz"]
    if block == "feet_force":
        return [f"ff_{foot}_{c}" for foot in ("l", "r") for c in ("fx", "fy", "fz", "tx", "ty", "tz")]
    return [f"{block}_{i}" for i in range(n)]


CURRENT_NAMES = ["counter", "z_coord"] + [
    name for b in DIFFERENTIATED for name in _names(b, BLOCK_SIZES[b])]
DERIVATIVE_NAMES = ["d_" + n for n in CURRENT_NAMES[2:]]
STATE_LAYOUT = tuple(CURRENT_NAMES + DERIVATIVE_NAMES)
assert len(CURRENT_NAMES) == 41 and len(DERIVATIVE_NAMES) == 39


def layout_hash() -> str:
    return hashlib.sha256("\n".join(STATE_LAYOUT).encode()).hexdigest()


@dataclass(frozen=True)
class SensorFrame:
    z_coord: float
    orientation: float
    gyro: np.ndarray
    accel: np.ndarray
    feet_force: np.ndarray
    joints: np.ndarray
    timestamp: float

    def __post_init__(self):
        for name in ("gyro", "accel", "feet_force", "joints"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (BLOCK_SIZES[name],):
                raise ValidationError(f"{name} must have {BLOCK_SIZES[name]} values, got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def differentiable(self) -> np.ndarray:
        return np.concatenate([[self.orientation], self.gyro, self.accel, self.feet_force, self.joints])

    @classmethod
    def from_row(cls, row: dict) -> "SensorFrame":
        def grab(block):
            return [float(row[n]) for n in _names(block, BLOCK_SIZES[block])]
        return cls(float(row["z_coord"]), float(row["orientation"]), grab("gyro"), grab("accel"),
                   grab("feet_force"), grab("joints"), float(row["timestamp"]))


def update_counter(counter: int, robot_stopped: bool, time_step_index: int) -> int:
    """Zero while stopped; otherwise +1 each time the step index reaches a
    multiple of the visual period."""
    if robot_stopped:
        return 0
    if time_step_index > 0 and time_step_index % VISUAL_PERIOD == 0:
        return counter + 1
    return counter


def assemble_state(curr: SensorFrame, prev: SensorFrame, counter: int,
                   fixed_dt: Optional[float] = None) -> np.ndarray:
    if fixed_dt is None:
        dt = curr.timestamp - prev.timestamp
        if not dt > 0:
            raise ValidationError(
                f"timestamps must increase (prev {prev.timestamp}, curr {curr.timestamp})")
    else:
        dt = fixed_dt
    now = curr.differentiable()
    deriv = (now - prev.differentiable()) / dt
    return np.concatenate([[float(counter), curr.z_coord], now, deriv])


# ---------------------------------------------------------------------------
# Orientation predictor
# ---------------------------------------------------------------------------

DEFAULT_FEATURES = ("gyro_x", "gyro_y", "gyro_z", "accel_x", "accel_y", "accel_z")
TARGET_COLUMN = "orientation_gt"


@dataclass
class OrientationPredictor:
    columns: tuple[str, ...]
    crosses: tuple[tuple[int, int], ...]
    weights: np.ndarray
    bias: float
    rmse: float = float("nan")
    rank_deficient: bool = False

    def design(self, X) -> np.ndarray:
        return expand_features(X, self.crosses)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.design(X) @ self.weights + self.bias


def expand_features(X, crosses) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if not crosses:
        return X
    extra = np.column_stack([X[:, i] * X[:, j] for i, j in crosses])
    return np.hstack([X, extra])


def fit_orientation_predictor(X, y, columns: Sequence[str] | None = None,
                              crosses: bool | Sequence[tuple[int, int]] = False,
                              ridge: float = 1e-8) -> OrientationPredictor:
    """Least squares (tiny ridge, unpenalised intercept) from raw columns and
    optional pairwise products (``crosses=True`` adds every pair)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n, m = X.shape
    if n < 2 or len(y) != n:
        raise ValidationError("need at least 2 rows and one target per row")
    if crosses is True:
        pairs = tuple(itertools.combinations_with_replacement(range(m), 2))
    elif crosses:
        pairs = tuple(tuple(p) for p in crosses)
    else:
        pairs = ()
    F = expand_features(X, pairs)
    mu_x, mu_y = F.mean(axis=0), y.mean()
    Fc, yc = F - mu_x, y - mu_y
    rank = np.linalg.matrix_rank(Fc) if Fc.size else 0
    deficient = bool(rank < F.shape[1])
    if deficient:
        warnings.warn(f"orientation design matrix is rank deficient ({rank} < {F.shape[1]})",
                      RuntimeWarning, stacklevel=2)
    A = Fc.T @ Fc + ridge * np.eye(F.shape[1])
    w = np.linalg.solve(A, Fc.T @ yc)
    b = float(mu_y - mu_x @ w)
    cols = tuple(columns) if columns is not None else tuple(f"x{i}" for i in range(m))
    rmse = float(np.sqrt(np.mean((F @ w + b - y) ** 2)))
    return OrientationPredictor(cols, pairs, w, b, rmse, deficient)


def load_orientation_dataset(path, columns: Sequence[str] | None = None):
    """Read a CSV with a header row; returns ``(X, y, columns)``."""
    with open(Path(path), newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or TARGET_COLUMN not in reader.fieldnames:
            raise ValidationError(f"{path}: missing '{TARGET_COLUMN}' column")
        cols = list(columns) if columns else [c for c in DEFAULT_FEATURES if c in reader.fieldnames]
        if not cols:
            raise ValidationError(f"{path}: no feature columns found")
        missing = set(cols) - set(reader.fieldnames)
        if missing:
            raise ValidationError(f"{path}: missing columns {sorted(missing)}")
        rows = list(reader)
    X = np.array([[float(r[c]) for c in cols] for r in rows])
    y = np.array([float(r[TARGET_COLUMN]) for r in rows])
    return X, y, cols


SENSOR_COLUMNS = ["timestamp", "z_coord"] + CURRENT_NAMES[2:]
