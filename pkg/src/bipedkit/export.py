"""CSV/JSON export and re-import of trajectories and simulation logs.

Floats are written with 17 significant digits so every value survives a
round trip bit for bit. CSV files carry a single header row; JSON files
hold ``{"kind", "dt", "meta", "columns"}`` with the same column names.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Mapping

import numpy as np

from .kinematics import JOINT_NAMES
from .model_core import ComTrajectory, ValidationError, ZmpReference
from .pipeline import GaitTrajectory, zmp_check
from .simulator import LOG_FIELDS, SimLog

FORMATS = ("csv", "json")
JOINT_COLUMNS = tuple(f"{s}_{j}" for s in ("l", "r") for j in JOINT_NAMES)
PLAN_COLUMNS = ("t", "px", "py", "support_side", "step_index")
SOLVE_COLUMNS = ("t", "x", "y", "z", "ax", "ay", "az", "px_check", "py_check")


class ExportError(OSError):
    pass


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()] if v.dtype == object else v.tolist()
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _dump(fh, columns, fmt, kind, dt, meta):
    names = list(columns)
    if fmt == "csv":
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        n = len(next(iter(columns.values()))) if names else 0
        for i in range(n):
            w.writerow([_fmt(columns[c][i]) for c in names])
    else:
        doc = {"kind": kind, "dt": dt, "meta": _jsonable_meta(meta or {}),
               "columns": {c: _jsonable(np.asarray(columns[c])) for c in names}}
        json.dump(doc, fh)
        fh.write("\n")


def _jsonable_meta(meta: dict) -> dict:
    return json.loads(json.dumps(meta, default=_jsonable))


def write_table(path, columns: Mapping[str, np.ndarray], fmt: str = "csv",
                kind: str = "table", dt: float | None = None, meta: dict | None = None):
    """Write to a path, or to an open text stream when ``path`` has ``write``."""
    if fmt not in FORMATS:
        raise ValidationError(f"unknown format {fmt!r}; choose from {FORMATS}")
    if hasattr(path, "write"):
        _dump(path, columns, fmt, kind, dt, meta)
        return path
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            _dump(fh, columns, fmt, kind, dt, meta)
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _column(values: list) -> np.ndarray:
    try:
        return np.array([float(v) for v in values], dtype=float)
    except ValueError:
        return np.array(values, dtype=object)


def read_table(path) -> tuple[dict[str, np.ndarray], dict]:
    """Returns ``(columns, info)``; ``info`` holds kind/dt/meta for JSON files."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ExportError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        cols = {}
        for k, v in doc["columns"].items():
            a = np.array(v)
            cols[k] = a.astype(float) if a.dtype.kind in "iuf" else a.astype(object)
        return cols, {"kind": doc.get("kind"), "dt": doc.get("dt"), "meta": doc.get("meta", {})}
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    cols = {h: _column([r[i] for r in body]) for i, h in enumerate(header)}
    return cols, {}


# ---------------------------------------------------------------------------
# Typed tables
# ---------------------------------------------------------------------------

def com_table(com: ComTrajectory) -> dict[str, np.ndarray]:
    return {"t": com.t, **com.columns()}


def zmp_table(zmp: ZmpReference) -> dict[str, np.ndarray]:
    return {"t": zmp.t, "px": zmp.px, "py": zmp.py}


def plan_table(traj: GaitTrajectory) -> dict[str, np.ndarray]:
    p = traj.params
    t = traj.t
    side, idx = [], []
    for tk in t:
        ph = traj.plan.phase(float(tk), p.double_support_ratio)
        side.append("LR" if ph.double_support else ph.support_side.value)
        idx.append(ph.interval)
    return {"t": t, "px": traj.zmp.px, "py": traj.zmp.py,
            "support_side": np.array(side, dtype=object), "step_index": np.array(idx)}


def solve_table(traj: GaitTrajectory) -> dict[str, np.ndarray]:
    check = zmp_check(traj)
    return {**com_table(traj.com), "px_check": check.px, "py_check": check.py}


def joints_table(traj: GaitTrajectory) -> dict[str, np.ndarray]:
    if traj.joints is None:
        raise ValidationError("trajectory has no joint solution")
    return {"t": traj.t, **{name: traj.joints[:, i] for i, name in enumerate(JOINT_COLUMNS)}}


def log_table(log: SimLog) -> dict[str, np.ndarray]:
    cols = dict(log.columns)
    if log.joints is not None:
        cols.update({name: log.joints[:, i] for i, name in enumerate(JOINT_COLUMNS)})
    return cols


def export(obj, path, fmt: str = "csv"):
    """Write a ComTrajectory, ZmpReference, SimLog or column dict."""
    if isinstance(obj, ComTrajectory):
        return write_table(path, com_table(obj), fmt, "com", obj.dt, {"g": obj.g})
    if isinstance(obj, ZmpReference):
        return write_table(path, zmp_table(obj), fmt, "zmp", obj.dt)
    if isinstance(obj, SimLog):
        return write_table(path, log_table(obj), fmt, "simlog", obj.dt, obj.meta)
    if isinstance(obj, Mapping):
        return write_table(path, obj, fmt)
    raise ValidationError(f"cannot export {type(obj).__name__}")


def _dt(cols, info, dt):
    if dt is None:
        dt = info.get("dt")
    if dt is None:
        t = cols.get("t")
        if t is None or len(t) < 2:
            raise ValidationError("cannot infer dt; pass it explicitly")
        dt = float(t[1] - t[0])
    return dt


def import_com(path, dt: float | None = None, g: float | None = None) -> ComTrajectory:
    cols, info = read_table(path)
    g = g if g is not None else info.get("meta", {}).get("g", 9.81)
    return ComTrajectory(_dt(cols, info, dt), *(cols[c] for c in ComTrajectory._COLS), g=g)


def import_log(path, dt: float | None = None) -> SimLog:
    cols, info = read_table(path)
    out = {}
    for k in LOG_FIELDS:
        v = cols[k]
        if k == "fallen":
            v = np.array([bool(x) for x in v], dtype=bool)
        elif k == "support":
            v = np.array([str(x) for x in v], dtype=object)
        out[k] = v
    joints = None
    if all(c in cols for c in JOINT_COLUMNS):
        joints = np.column_stack([cols[c] for c in JOINT_COLUMNS]) if len(cols["t"]) else np.zeros((0, 12))
    return SimLog(_dt(cols, info, dt) if len(out["t"]) > 1 else (dt or info.get("dt") or 0.01),
                  out, joints, info.get("meta", {}))
