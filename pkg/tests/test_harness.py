import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from shapely.geometry import Point, Polygon

from bipedkit.export import (
    ExportError,
    JOINT_COLUMNS,
    PLAN_COLUMNS,
    export,
    import_com,
    import_log,
    plan_table,
    read_table,
    solve_table,
    write_table,
)
from bipedkit.kinematics import JOINT_NAMES, joint_limits
from bipedkit.model_core import ComTrajectory, FrameTransform, GaitCommand, RobotParams, Side, ValidationError
from bipedkit.pipeline import JOINT_SLEW_LIMIT, PipelineError, generate_gait, max_joint_step
from bipedkit.simulator import Disturbance, SimConfig, SimLog, simulate_walk
from bipedkit.support import SupportPolygon, support_polygon, zmp_margin

UNIT = SupportPolygon(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float))


def densified_margin(point, verts, per_edge=20_000):
    """Brute force: nearest of many boundary samples, signed by shapely containment."""
    a = np.asarray(verts, dtype=float)
    b = np.roll(a, -1, axis=0)
    s = np.linspace(0, 1, per_edge)[:, None, None]
    pts = (a + s * (b - a)).reshape(-1, 2)
    d = np.min(np.hypot(*(pts - point).T))
    return d if Polygon(a).covers(Point(point)) else -d


# -- margin -----------------------------------------------------------------

def test_unit_square_hand_values():
    assert zmp_margin((0.5, 0.5), UNIT) == 0.5
    assert zmp_margin((1.0, 1.0), UNIT) == 0.0
    assert zmp_margin((1.1, 0.5), UNIT) == pytest.approx(-0.1, abs=1e-15)
    # the sampled boundary misses the foot point by up to half a sample spacing
    assert densified_margin(np.array([1.1, 0.5]), UNIT.vertices) == pytest.approx(-0.1, abs=1e-8)


@given(st.floats(-1, 2), st.floats(-1, 2), st.floats(-0.5, 0.5))
def test_margin_matches_shapely(x, y, yaw):
    p = RobotParams()
    feet = [FrameTransform((0.0, 0.05, 0.0), (0, 0, yaw)), FrameTransform((0.1, -0.05, 0.0))]
    poly = support_polygon(feet, p)
    shp = Polygon(poly.vertices)
    d = shp.exterior.distance(Point(x, y))
    expected = d if shp.covers(Point(x, y)) else -d
    assert zmp_margin((x, y), poly) == pytest.approx(expected, abs=1e-9)


def test_margin_matches_densified_oracle(rng):
    poly = support_polygon([FrameTransform((0, 0.05, 0), (0, 0, 0.3)),
                            FrameTransform((0.05, -0.05, 0))], RobotParams())
    for q in rng.uniform(-0.15, 0.2, size=(30, 2)):
        assert zmp_margin(q, poly) == pytest.approx(densified_margin(q, poly.vertices), abs=1e-6)


def test_polygon_validation():
    with pytest.raises(ValidationError):
        SupportPolygon(np.array([[0, 0], [1, 0]], dtype=float))
    with pytest.raises(ValidationError):
        SupportPolygon(UNIT.vertices[::-1])  # clockwise
    with pytest.raises(ValidationError):
        SupportPolygon(np.array([[0, 0], [2, 0], [1, 0.2], [1, 1]], dtype=float))  # reflex vertex
    with pytest.raises(ValidationError):
        SupportPolygon(np.array([[0, 0], [1, 0], [2, 0]], dtype=float))


# -- simulator --------------------------------------------------------------

def test_undisturbed_walk(params):
    log = simulate_walk(GaitCommand(0.1, 0, 0), params, duration=10.0, with_joints=False)
    assert len(log) == 1000
    assert not log.fallen and log.min_margin >= 0.005
    assert set(log["support"]) == {"L", "R", "LR"}


def test_deterministic(params):
    kw = dict(duration=3.0, disturbances=[(1.0, 0.1, 0.05)], seed=5)
    a = simulate_walk(GaitCommand(0.05, 0, 0.2), params, **kw)
    b = simulate_walk(GaitCommand(0.05, 0, 0.2), params, **kw)
    assert a == b
    c = simulate_walk(GaitCommand(0.05, 0, 0.2), params, **dict(kw, seed=6))
    assert not np.array_equal(a["zmp_x"], c["zmp_x"])


def test_large_push_falls(params):
    log = simulate_walk(GaitCommand(0.1, 0, 0), params, duration=4.0,
                        disturbances=[Disturbance(2.0, 1.0)], with_joints=False)
    assert log.fallen
    k = int(np.argmax(log["fallen"]))
    # the flag rises on the third consecutive sample outside the polygon, then stays set
    assert np.all(log["margin"][k - 2:k + 1] < 0) and np.all(log["fallen"][k:])


def test_fall_monotone_in_impulse(params):
    falls = [simulate_walk(GaitCommand(0.1, 0, 0), params, duration=4.0, balance_on=False,
                           disturbances=[(2.0, m)], with_joints=False).fallen
             for m in np.arange(0.1, 0.9, 0.1)]
    assert falls == sorted(falls) and falls[-1] and not falls[0]


def test_tolerance_and_debounce(params):
    push = [(2.0, 0.5)]
    base = simulate_walk(GaitCommand(0.1, 0, 0), params, duration=4.0, disturbances=push,
                         balance_on=False, with_joints=False)
    lax = simulate_walk(GaitCommand(0.1, 0, 0), params, duration=4.0, disturbances=push,
                        balance_on=False, with_joints=False,
                        config=SimConfig(fall_samples=10_000))
    assert base.fallen and not lax.fallen
    np.testing.assert_array_equal(base["margin"], lax["margin"])


def test_balance_logged_only_when_on(params):
    kw = dict(duration=2.0, disturbances=[(1.0, 0.15, 0.1)], with_joints=False)
    off = simulate_walk(GaitCommand(0.1, 0, 0), params, balance_on=False, **kw)
    on = simulate_walk(GaitCommand(0.1, 0, 0), params, balance_on=True, **kw)
    assert np.all(off["balance_pitch"] == 0) and np.any(on["balance_pitch"] != 0)


def test_bad_duration(params):
    with pytest.raises(ValidationError):
        simulate_walk(GaitCommand(), params, duration=0.0)


def test_pipeline_error_names_stage(params):
    with pytest.raises(PipelineError) as err:
        generate_gait(GaitCommand(0.1, 0, 0), params, 1)
    assert err.value.stage == "plan"
    with pytest.raises(PipelineError) as err:
        generate_gait(GaitCommand(0.1, 0, 0), params, 4, solver="spline")
    assert err.value.stage == "com"


def test_simlog_rejects_bad_time():
    cols = {k: np.zeros(3) for k in ("t", "margin")}
    cols["t"] = np.array([0.0, 0.01, 0.03])
    with pytest.raises(ValidationError):
        SimLog(0.01, cols)


# -- pipeline joints --------------------------------------------------------

@pytest.mark.parametrize("solver", ["cart-table", "pendulum"])
def test_pipeline_joints_within_limits(params, solver):
    traj = generate_gait(GaitCommand(0.15, 0, 0.2), params, 8, solver=solver)
    assert traj.joints.shape == (len(traj.zmp), 12)
    for i, side in enumerate((Side.LEFT, Side.RIGHT)):
        lim = joint_limits(side)
        for j, name in enumerate(JOINT_NAMES):
            lo, hi = lim[name]
            col = traj.joints[:, 6 * i + j]
            assert np.all((col >= lo) & (col <= hi)), name
    assert max_joint_step(traj.joints) <= JOINT_SLEW_LIMIT


# -- export -----------------------------------------------------------------

@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_com_round_trip_bit_exact(tmp_path, rng, fmt):
    x, y, ax, ay, az = rng.normal(size=(5, 50))
    com = ComTrajectory(0.01, x, y, 0.3 + 0.01 * rng.normal(size=50), ax, ay, az)
    path = tmp_path / f"com.{fmt}"
    export(com, path, fmt)
    back = import_com(path)
    for name in ("x", "y", "z", "ax", "ay", "az"):
        np.testing.assert_array_equal(getattr(back, name), getattr(com, name))
    assert back.dt == com.dt


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_log_round_trip(tmp_path, params, fmt):
    log = simulate_walk(GaitCommand(0.1, 0, 0), params, duration=1.0, seed=2)
    path = tmp_path / f"log.{fmt}"
    export(log, path, fmt)
    assert import_log(path) == log


def test_ten_second_log_has_1000_rows(tmp_path, params):
    log = simulate_walk(GaitCommand(0.1, 0, 0), params, duration=10.0, with_joints=False)
    export(log, tmp_path / "walk.csv")
    lines = (tmp_path / "walk.csv").read_text().splitlines()
    assert len(lines) == 1 + 1000


def test_empty_log_header_only():
    buf = io.StringIO()
    export(SimLog(0.01), buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 1 and lines[0].startswith("t,com_x")


def test_plan_and_solve_tables(params):
    traj = generate_gait(GaitCommand(0.1, 0, 0), params, 4, with_joints=False)
    plan = plan_table(traj)
    assert tuple(plan) == PLAN_COLUMNS
    assert set(plan["support_side"]) == {"L", "R", "LR"}
    solve = solve_table(traj)
    interior = slice(1, -1)
    assert np.sqrt(np.mean((solve["px_check"] - traj.zmp.px)[interior] ** 2)) <= 1e-6


def test_joint_columns_order():
    assert JOINT_COLUMNS[:6] == tuple("l_" + n for n in JOINT_NAMES)
    assert JOINT_COLUMNS[6:] == tuple("r_" + n for n in JOINT_NAMES)


def test_unwritable_path_names_path(tmp_path):
    target = tmp_path / "missing" / "out.csv"
    with pytest.raises(ExportError, match="missing"):
        write_table(target, {"t": np.zeros(2)})
    with pytest.raises(ValidationError):
        write_table(tmp_path / "x.xml", {"t": np.zeros(2)}, fmt="xml")


def test_read_table_json_meta(tmp_path):
    write_table(tmp_path / "a.json", {"t": np.arange(3) * 0.5}, "json", dt=0.5, meta={"k": 1})
    cols, info = read_table(tmp_path / "a.json")
    assert info["dt"] == 0.5 and info["meta"] == {"k": 1}
    assert math.isclose(cols["t"][2], 1.0)
