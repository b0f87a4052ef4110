import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from bipedkit.kinematics import (
    JOINT_NAMES,
    JointLimitError,
    LegJoints,
    LowerBodyIKError,
    UnreachableError,
    joint_limits,
    leg_fk,
    leg_ik,
    lower_body_ik,
)
from bipedkit.model_core import FrameTransform, RobotParams, Side


def chain_oracle(j: LegJoints, p: RobotParams):
    """Independent chain product built from scipy rotations."""
    R = Rotation.from_euler("ZXY", [j.hip_yaw, j.hip_roll, j.hip_pitch])  # intrinsic = Rz Rx Ry
    pos = R.apply([0, 0, -p.thigh_len])
    R = R * Rotation.from_euler("Y", j.knee_pitch)
    pos = pos + R.apply([0, 0, -p.shank_len])
    R = R * Rotation.from_euler("YX", [j.ankle_pitch, j.ankle_roll])
    pos = pos + R.apply([0, 0, -p.ankle_height])
    return pos, R.as_matrix()


def random_joints(rng, side, shrink=0.98):
    """Limit-respecting joints with the knee kept off the straight singularity."""
    lim = dict(joint_limits(side), knee_pitch=(0.05, joint_limits(side)["knee_pitch"][1]))
    vals = []
    for name in JOINT_NAMES:
        lo, hi = lim[name]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo) * shrink
        vals.append(rng.uniform(mid - half, mid + half))
    return LegJoints(*vals)


def test_straight_leg(params):
    f = leg_fk(LegJoints(), Side.LEFT, params)
    reach = params.thigh_len + params.shank_len + params.ankle_height
    assert f.translation == pytest.approx((0.0, 0.0, -reach), abs=1e-15)
    assert f.rotation == (0.0, 0.0, 0.0)


def test_knee_right_angle(params):
    f = leg_fk(LegJoints(knee_pitch=math.pi / 2), Side.LEFT, params, check_limits=False)
    # shank and ankle offset swing behind the knee
    assert f.translation == pytest.approx((-(params.shank_len + params.ankle_height), 0.0,
                                           -params.thigh_len), abs=1e-15)
    assert f.rotation[1] == pytest.approx(math.pi / 2)


def test_fk_matches_chain_oracle(params, rng):
    for side in Side:
        for _ in range(50):
            j = random_joints(rng, side)
            f = leg_fk(j, side, params)
            pos, R = chain_oracle(j, params)
            np.testing.assert_allclose(f.p, pos, atol=1e-14)
            np.testing.assert_allclose(f.R, R, atol=1e-12)


def test_fk_ik_round_trip(params, rng):
    worst_p = worst_r = 0.0
    for k in range(1000):
        side = Side.LEFT if k % 2 else Side.RIGHT
        target = leg_fk(random_joints(rng, side), side, params)
        back = leg_fk(leg_ik(target, side, params, check_limits=True), side, params)
        worst_p = max(worst_p, np.abs(back.p - target.p).max())
        worst_r = max(worst_r, Rotation.from_matrix(back.R.T @ target.R).magnitude())
    assert worst_p <= 1e-6 and worst_r <= 1e-6


def test_ik_fk_round_trip(params, rng):
    for k in range(500):
        side = Side.LEFT if k % 2 else Side.RIGHT
        j = random_joints(rng, side)
        back = leg_ik(leg_fk(j, side, params), side, params)
        np.testing.assert_allclose(back.as_array(), j.as_array(), atol=1e-6)


def test_straight_down_full_reach(params):
    reach = params.thigh_len + params.shank_len + params.ankle_height
    j = leg_ik(FrameTransform((0, 0, -reach)), Side.LEFT, params)
    np.testing.assert_allclose(j.as_array(), 0.0, atol=1e-6)


def test_straight_down_knee_angle(params):
    d = 0.24  # hip-to-ankle
    target = FrameTransform((0, 0, -(d + params.ankle_height)))
    j = leg_ik(target, Side.RIGHT, params)
    t, s = params.thigh_len, params.shank_len
    assert j.knee_pitch == pytest.approx(math.pi - math.acos((t * t + s * s - d * d) / (2 * t * s)),
                                         abs=1e-12)
    assert leg_fk(j, Side.RIGHT, params).allclose(target, atol=1e-12)


def test_beyond_reach(params):
    reach = params.thigh_len + params.shank_len + params.ankle_height
    with pytest.raises(UnreachableError):
        leg_ik(FrameTransform((0, 0, -(reach + 1e-3))), Side.LEFT, params)


def test_limit_check(params):
    with pytest.raises(JointLimitError):
        leg_fk(LegJoints(knee_pitch=-0.1), Side.LEFT, params)


@given(st.floats(-0.05, 0.05), st.floats(-0.04, 0.04), st.floats(0.22, 0.30),
       st.floats(-0.3, 0.3), st.floats(-0.2, 0.2))
def test_mirror_symmetry(x, y, depth, yaw, roll):
    p = RobotParams()
    target = FrameTransform((x, y, -depth), (roll, 0.0, yaw))
    mirror = FrameTransform((x, -y, -depth), (-roll, 0.0, -yaw))
    a = leg_ik(target, Side.LEFT, p)
    b = leg_ik(mirror, Side.RIGHT, p)
    np.testing.assert_allclose(a.mirrored().as_array(), b.as_array(), atol=1e-9)


def test_symmetric_stance_mirror_joints(params):
    h = params.nominal_com_height_h
    left = FrameTransform((0.01, 0.06, -h), (0, 0, 0.1))
    right = FrameTransform((0.01, -0.06, -h), (0, 0, -0.1))
    jl, jr = lower_body_ik(left, right, params)
    np.testing.assert_allclose(jl.mirrored().as_array(), jr.as_array(), atol=1e-12)


def test_com_above_reach_fails_both_sides(params):
    far = 0.5
    with pytest.raises(LowerBodyIKError) as err:
        lower_body_ik(FrameTransform((0, 0.05, -far)), FrameTransform((0, -0.05, -far)), params)
    assert set(err.value.errors) == {Side.LEFT, Side.RIGHT}
