"""Support polygons and the signed ZMP stability margin."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.spatial import ConvexHull

from .model_core import FrameTransform, RobotParams, ValidationError


@dataclass(frozen=True)
class SupportPolygon:
    vertices: np.ndarray  # (n, 2), counter-clockwise
    label: str = ""

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValidationError("polygon needs at least 3 planar vertices")
        if signed_area(v) <= 1e-15:
            raise ValidationError("polygon must be counter-clockwise with nonzero area")
        e = np.roll(v, -1, axis=0) - v
        turn = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.any(turn < -1e-12):
            raise ValidationError("polygon is not convex")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def hull(cls, points, label: str = "") -> "SupportPolygon":
        pts = np.asarray(points, dtype=float)
        h = ConvexHull(pts)
        return cls(pts[h.vertices], label)  # scipy returns 2-D hulls counter-clockwise


def signed_area(v) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def foot_corners(frame: FrameTransform, p: RobotParams) -> np.ndarray:
    hl, hw = 0.5 * p.foot_length, 0.5 * p.foot_width
    local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
    c, s = np.cos(frame.yaw), np.sin(frame.yaw)
    R = np.array([[c, -s], [s, c]])
    return local @ R.T + np.array(frame.translation[:2])


def support_polygon(feet: Iterable[FrameTransform], p: RobotParams, label: str = "") -> SupportPolygon:
    pts = np.vstack([foot_corners(f, p) for f in feet])
    return SupportPolygon.hull(pts, label)


def zmp_margin(point, poly: SupportPolygon) -> float:
    """Signed distance from ``point`` to the polygon boundary, positive inside."""
    q = np.asarray(point, dtype=float)
    a = poly.vertices
    b = np.roll(a, -1, axis=0)
    e = b - a
    w = q - a
    t = np.clip(np.einsum("ij,ij->i", w, e) / np.einsum("ij,ij->i", e, e), 0.0, 1.0)
    d = np.sqrt(np.min(np.sum((w - t[:, None] * e) ** 2, axis=1)))
    inside = np.all(e[:, 0] * w[:, 1] - e[:, 1] * w[:, 0] >= 0.0)
    return float(d if inside else -d)
