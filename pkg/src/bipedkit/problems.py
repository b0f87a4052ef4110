"""Named objectives for the ``optimize`` command."""
from __future__ import annotations

import numpy as np

from .contextual_kick import N_PARAMS, SurrogateKick, check_context
from .model_core import BalanceConfig, GaitCommand, RobotParams, ValidationError
from .optimizers import Objective, rosenbrock, sphere
from .simulator import SimConfig, simulate_walk

PROBLEMS = ("sphere", "rosenbrock", "gait-stability", "kick-surrogate")


def gait_stability(p: RobotParams, balance: BalanceConfig, impulse: float = 0.15,
                   duration: float = 3.0) -> Objective:
    """Tune ``(kp, kd)``: mean trunk-proxy error in the second after a
    forward-lateral push, plus 1 if the robot falls."""
    t_push = 1.0

    def f(theta):
        cfg = BalanceConfig(float(theta[0]), float(theta[1]), balance.ki,
                            balance.max_correction, balance.tilt_gain)
        log = simulate_walk(GaitCommand(0.1, 0.0, 0.0), p, "pendulum",
                            [(t_push, impulse, 0.5 * impulse)], True, duration, seed=0,
                            balance=cfg, config=SimConfig(), with_joints=False)
        return log.trunk_error(t_push, 1.0) + (1.0 if log.fallen else 0.0)

    return Objective(2, [(0.0, 2.0), (0.0, 0.1)], f, "gait-stability")


def kick_surrogate(distance: float = 7.5, task: SurrogateKick | None = None) -> Objective:
    """Kick parameters for one fixed desired distance."""
    task = task or SurrogateKick()
    s = float(check_context(distance))

    def f(theta):
        return float(abs(task.achieved(np.asarray(theta)[None, :])[0] - s))

    return Objective(N_PARAMS, (-2.0, 2.0), f, "kick-surrogate")


def make_problem(name: str, dim: int = 5, params: RobotParams | None = None,
                 balance: BalanceConfig | None = None, distance: float = 7.5) -> Objective:
    if name == "sphere":
        return sphere(dim)
    if name == "rosenbrock":
        return rosenbrock(dim)
    if name == "gait-stability":
        return gait_stability(params or RobotParams(), balance or BalanceConfig())
    if name == "kick-surrogate":
        return kick_surrogate(distance)
    raise ValidationError(f"unknown problem {name!r}; choose from {PROBLEMS}")
