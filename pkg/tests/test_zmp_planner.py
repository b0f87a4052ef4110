import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from shapely.geometry import MultiPoint, Point

from bipedkit.model_core import GaitCommand, RobotParams, Side, ValidationError
from bipedkit.support import foot_corners
from bipedkit.zmp_planner import (
    FootstepPlan,
    HeightProfile,
    ReachError,
    StepLimitError,
    compute_height_profile,
    default_stance,
    generate_zmp_reference,
    plan_footsteps,
    second_difference,
    support_feet,
)


def test_in_place_plan_stays_on_stance(params):
    plan = plan_footsteps(GaitCommand(), params, 4)
    left, right = default_stance(params)
    sides = [s.side for s in plan.steps]
    assert sides == [Side.LEFT, Side.RIGHT, Side.LEFT, Side.RIGHT]
    for s in plan.steps:
        ref = left if s.side is Side.LEFT else right
        assert (s.pos_x, s.pos_y, s.yaw) == pytest.approx(ref.translation[:2] + (ref.yaw,), abs=1e-15)


def test_forward_plan_advances_two_step_lengths(params):
    # same-side steps are 2T apart, so they move vx * 2T = 0.2 m
    plan = plan_footsteps(GaitCommand(0.2, 0, 0), params, 4)
    xs = [s.pos_x for s in plan.steps]
    assert xs[2] - xs[0] == pytest.approx(0.2, abs=1e-12)
    assert xs[3] - xs[1] == pytest.approx(0.2, abs=1e-12)
    assert all(abs(s.pos_y) == pytest.approx(params.hip_offset_y) for s in plan.steps)


def test_yaw_limit_clamp_or_raise(params):
    omega = 2 * params.max_step_yaw / params.step_duration_T
    with pytest.raises(StepLimitError):
        plan_footsteps(GaitCommand(0, 0, omega), params, 4, clamp=False)
    plan = plan_footsteps(GaitCommand(0, 0, omega), params, 4, clamp=True)
    yaws = [s.yaw for s in plan.steps]
    assert np.diff(yaws) == pytest.approx([params.max_step_yaw] * 3)


def test_first_swing_side_follows_turn_direction(params):
    assert plan_footsteps(GaitCommand(0, 0, -0.2), params, 2).steps[0].side is Side.RIGHT
    assert plan_footsteps(GaitCommand(0, 0.05, 0), params, 2).steps[0].side is Side.LEFT
    forced = plan_footsteps(GaitCommand(), params, 2, first_side=Side.RIGHT)
    assert forced.steps[0].side is Side.RIGHT


def test_too_few_steps(params):
    with pytest.raises(ValidationError):
        plan_footsteps(GaitCommand(), params, 1)


commands = st.builds(GaitCommand, st.floats(-0.2, 0.2), st.floats(-0.1, 0.1), st.floats(-0.6, 0.6))


@given(commands, st.integers(2, 9))
def test_duration_exact(cmd, n):
    p = RobotParams()
    assert plan_footsteps(cmd, p, n).duration == n * p.step_duration_T


@given(commands, st.integers(2, 8))
def test_mirror_command_mirrors_plan(cmd, n):
    p = RobotParams()
    a = plan_footsteps(cmd, p, n).mirrored()
    b = plan_footsteps(cmd.mirrored(), p, n, first_side=None if cmd.vy or cmd.omega else Side.RIGHT)
    for sa, sb in zip(a.steps, b.steps):
        assert sa.side is sb.side
        assert sa.pos_x == pytest.approx(sb.pos_x, abs=1e-12)
        assert sa.pos_y == pytest.approx(sb.pos_y, abs=1e-12)
        assert math.remainder(sa.yaw - sb.yaw, 2 * math.pi) == pytest.approx(0, abs=1e-12)


def test_double_support_ratio_zero_is_step_function(params):
    p = params.replace(double_support_ratio=0.0)
    plan = plan_footsteps(GaitCommand(), p, 4)
    zmp = generate_zmp_reference(plan, p)
    left, right = default_stance(p)
    centres = {left.translation[1], right.translation[1]}
    assert set(np.round(zmp.py, 15)) <= centres
    assert set(zmp.px) == {0.0}


def test_in_place_zmp_alternates(params):
    plan = plan_footsteps(GaitCommand(), params, 4)
    zmp = generate_zmp_reference(plan, params)
    # single support at the middle of each interval
    k = [int((i + 0.5) * params.step_duration_T / params.dt) for i in range(4)]
    assert list(zmp.py[k]) == pytest.approx([-0.05, 0.05, -0.05, 0.05])
    assert np.all(np.abs(zmp.py) <= 0.05 + 1e-15)


def _active_hull(plan, t, p):
    ph = plan.phase(t, p.double_support_ratio)
    pts = np.vstack([foot_corners(f, p) for _, f in support_feet(ph)])
    return MultiPoint([tuple(q) for q in pts]).convex_hull


@pytest.mark.parametrize("cmd", [GaitCommand(0.1, 0, 0), GaitCommand(0.05, 0.03, 0.3),
                                 GaitCommand(0, -0.08, -0.4)])
def test_zmp_inside_support_polygon(params, cmd):
    plan = plan_footsteps(cmd, params, 4)
    zmp = generate_zmp_reference(plan, params)
    assert len(zmp) == 200
    for k in range(len(zmp)):
        hull = _active_hull(plan, k * params.dt, params)
        assert hull.buffer(1e-12).contains(Point(zmp.px[k], zmp.py[k]))


def test_plan_validation_rejects_same_side(params):
    plan = plan_footsteps(GaitCommand(), params, 3)
    s = list(plan.steps)
    s[1] = s[0].__class__(s[1].pos_x, s[1].pos_y, s[1].yaw, s[0].side, s[1].t_start, s[1].t_end)
    with pytest.raises(ValidationError):
        FootstepPlan(tuple(s), plan.initial_stance)


def test_height_profile_hand_value():
    # L_max = 0.16 + 0.15 + 0.04 = 0.35; CoM displaced so each hip is 0.21 m from its foot
    p = RobotParams(thigh_len=0.16, shank_len=0.15)
    plan = plan_footsteps(GaitCommand(), p, 2)
    n = plan.n_samples(p.dt)
    com = np.tile([0.21, 0.0], (n, 1))
    hp = compute_height_profile(plan, com, p)
    assert hp.z_samples == pytest.approx(np.full(n, math.sqrt(0.1225 - 0.0441) - 0.01), abs=1e-12)
    assert hp.z_samples[0] == pytest.approx(0.27, abs=1e-12)


def test_height_profile_clamps_to_nominal(params):
    plan = plan_footsteps(GaitCommand(), params, 2)
    n = plan.n_samples(params.dt)
    hp = compute_height_profile(plan, np.zeros((n, 2)), params)
    assert np.all(hp.z_samples == params.nominal_com_height_h)
    assert np.max(np.abs(hp.az_samples)) <= 1e-9


def test_height_profile_unreachable(params):
    plan = plan_footsteps(GaitCommand(), params, 2)
    n = plan.n_samples(params.dt)
    with pytest.raises(ReachError):
        compute_height_profile(plan, np.tile([0.5, 0.0], (n, 1)), params)


def test_second_difference_of_quadratic():
    t = np.arange(50) * 0.01
    np.testing.assert_allclose(second_difference(3.0 * t**2, 0.01), 6.0, atol=1e-9)


def test_constant_height_profile():
    hp = HeightProfile.constant(0.3, 10, 0.01)
    assert len(hp) == 10 and np.all(hp.az_samples == 0.0)
