import csv
import json

import numpy as np
import pytest

from bipedkit.cli import main
from bipedkit.export import JOINT_COLUMNS, PLAN_COLUMNS, SOLVE_COLUMNS, read_table
from bipedkit.run_features import SENSOR_COLUMNS, STATE_LAYOUT


def header(path):
    with open(path, newline="") as fh:
        return next(csv.reader(fh))


def test_gait_plan_csv(tmp_path):
    out = tmp_path / "plan.csv"
    assert main(["gait", "plan", "--vx", "0.1", "--out", str(out)]) == 0
    assert tuple(header(out)) == PLAN_COLUMNS
    cols, _ = read_table(out)
    assert len(cols["t"]) == 200


def test_gait_solve_model_flag(tmp_path):
    out = tmp_path / "solve.csv"
    assert main(["gait", "solve", "--model", "cart-table", "--out", str(out)]) == 0
    assert tuple(header(out)) == SOLVE_COLUMNS


def test_gait_joints_json(tmp_path):
    out = tmp_path / "joints.json"
    assert main(["--format", "json", "gait", "joints", "--omega", "0.2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert list(doc["columns"]) == ["t", *JOINT_COLUMNS]


def test_global_flags_after_verb(tmp_path):
    out = tmp_path / "plan.json"
    assert main(["gait", "plan", "--format", "json", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["kind"] == "gait-plan"


def test_walk_simulate(tmp_path, capsys):
    out = tmp_path / "walk.csv"
    rc = main(["walk", "simulate", "--duration", "2", "--impulse", "1.0,0.1", "--balance", "off",
               "--no-joints", "--out", str(out)])
    assert rc == 0
    cols, _ = read_table(out)
    assert len(cols["t"]) == 200
    assert "fallen=False" in capsys.readouterr().err


def test_optimize_json(tmp_path):
    out = tmp_path / "opt.json"
    rc = main(["--seed", "3", "optimize", "--algo", "cmaes", "--dim", "3", "--budget", "600",
               "--problem", "sphere", "--out", str(out), "--format", "json"])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert {"best_theta", "best_cost", "history"} <= set(doc)
    assert len(doc["best_theta"]) == 3


def test_optimize_is_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        main(["optimize", "--algo", "pso", "--dim", "2", "--budget", "200", "--seed", "9",
              "--format", "json", "--out", str(path)])
    assert a.read_text() == b.read_text()


def test_kick_train_and_eval(tmp_path):
    model = tmp_path / "model.json"
    assert main(["kick", "train", "--iters", "5", "--seed", "1", "--out", str(model)]) == 0
    doc = json.loads(model.read_text())
    assert {"centers", "bandwidth_sq", "W", "Sigma"} <= set(doc)
    out = tmp_path / "eval.csv"
    assert main(["kick", "eval", "--model", str(model), "--distance", "7.5", "--out", str(out)]) == 0
    cols, _ = read_table(out)
    assert list(cols["desired"]) == [7.5]
    assert cols["error"][0] == pytest.approx(abs(cols["achieved"][0] - 7.5))


def test_kick_eval_bad_distance(tmp_path):
    model = tmp_path / "model.json"
    main(["kick", "train", "--iters", "1", "--out", str(model)])
    assert main(["kick", "eval", "--model", str(model), "--distance", "20"]) == 1


def test_features_assemble(tmp_path, rng):
    src = tmp_path / "sensors.csv"
    with open(src, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SENSOR_COLUMNS)
        for k in range(7):
            w.writerow([0.02 * k] + rng.normal(size=len(SENSOR_COLUMNS) - 1).tolist())
    out = tmp_path / "state.csv"
    assert main(["features", "assemble", str(src), "--out", str(out)]) == 0
    assert tuple(header(out)) == STATE_LAYOUT
    cols, _ = read_table(out)
    assert list(cols["counter"]) == [0, 0, 1, 1, 1, 2]


def test_features_fit_orientation(tmp_path, rng, capsys):
    src = tmp_path / "orient.csv"
    X = rng.normal(size=(50, 2))
    with open(src, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gyro_x", "accel_z", "orientation_gt"])
        w.writerows(np.column_stack([X, X @ [0.5, -2.0] + 0.1]).tolist())
    assert main(["features", "fit-orientation", str(src)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["weights"] == pytest.approx([0.5, -2.0], abs=1e-8)
    assert doc["bias"] == pytest.approx(0.1, abs=1e-8)


# -- exit codes -------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["gait"],
    ["gait", "plan", "--vx", "fast"],
    ["walk", "simulate", "--impulse", "1.0"],
    ["walk", "simulate", "--balance", "maybe"],
    ["optimize", "--algo", "anneal"],
    ["gait", "plan", "--steps", "1"],
    ["gait", "plan", "--omega", "5", "--no-clamp"],
    ["walk", "simulate", "--duration", "0"],
])
def test_validation_errors_exit_1(argv):
    assert main(argv) == 1


def test_bad_config_exit_1(tmp_path):
    cfg = tmp_path / "robot.json"
    cfg.write_text(json.dumps({"step_duration_T": -1}))
    assert main(["--config", str(cfg), "gait", "plan"]) == 1
    cfg.write_text(json.dumps({"leg_colour": "red"}))
    assert main(["--config", str(cfg), "gait", "plan"]) == 1
    assert main(["--config", str(tmp_path / "none.json"), "gait", "plan"]) == 1


def test_missing_model_exit_1(tmp_path):
    assert main(["kick", "eval", "--model", str(tmp_path / "none.json")]) == 1


def test_unwritable_output_exit_2(tmp_path):
    assert main(["gait", "plan", "--out", str(tmp_path / "no" / "such" / "dir.csv")]) == 2
