"""Semantic facial landmarks and the geometry measures derived from them.

Landmark extraction happens on the client; the engine only sees named,
image-normalized points, so everything here is plain geometry with no
vision dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

REQUIRED_POINTS = (
    "nose_tip",
    "chin",
    "left_eye_outer",
    "left_eye_inner",
    "right_eye_outer",
    "right_eye_inner",
    "left_eye_upper",
    "left_eye_lower",
    "right_eye_upper",
    "right_eye_lower",
    "left_mouth_corner",
    "right_mouth_corner",
    "upper_lip",
    "lower_lip",
    "left_brow",
    "right_brow",
    "face_oval_left",
    "face_oval_right",
)

Point = tuple[float, float, float]


@dataclass(frozen=True)
class LandmarkFrame:
    """One timestamped landmark observation from the client."""

    t_ms: int
    face_present: bool
    points: Mapping[str, Point]

    def has_required_points(self) -> bool:
        return self.face_present and all(n in self.points for n in REQUIRED_POINTS)

    @classmethod
    def from_message(cls, msg: dict) -> "LandmarkFrame":
        points = {
            name: (float(xyz[0]), float(xyz[1]), float(xyz[2]) if len(xyz) > 2 else 0.0)
            for name, xyz in msg.get("points", {}).items()
        }
        return cls(
            t_ms=int(msg["t_ms"]),
            face_present=bool(msg["face_present"]),
            points=points,
        )

    def to_message(self) -> dict:
        return {
            "type": "frame",
            "t_ms": self.t_ms,
            "face_present": self.face_present,
            "points": {name: list(xyz) for name, xyz in self.points.items()},
        }


def _dist(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _mid(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    return ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)


@dataclass(frozen=True)
class FaceMeasures:
    """Pose and expression measures, all normalized by interocular distance.

    yaw grows when the nose tip moves toward the subject's right of the eye
    midpoint (image +x); pitch grows when the nose rises above the eye line.
    """

    yaw: float
    pitch: float
    mouth_aspect_ratio: float
    ear_left: float
    ear_right: float
    brow_left: float
    brow_right: float
    smile_width: float
    interocular: float


def measures_from_frame(frame: LandmarkFrame) -> FaceMeasures | None:
    """Geometry measures, or None when no usable face is present."""
    if not frame.has_required_points():
        return None
    p = frame.points
    left_eye = _mid(p["left_eye_outer"], p["left_eye_inner"])
    right_eye = _mid(p["right_eye_outer"], p["right_eye_inner"])
    interocular = _dist(left_eye, right_eye)
    if interocular <= 0:
        return None
    eye_mid = _mid(left_eye, right_eye)
    nose = p["nose_tip"]

    mouth_width = _dist(p["left_mouth_corner"], p["right_mouth_corner"])
    lip_gap = _dist(p["upper_lip"], p["lower_lip"])
    eye_w_left = _dist(p["left_eye_outer"], p["left_eye_inner"])
    eye_w_right = _dist(p["right_eye_outer"], p["right_eye_inner"])

    return FaceMeasures(
        yaw=(nose[0] - eye_mid[0]) / interocular,
        pitch=(eye_mid[1] - nose[1]) / interocular,
        mouth_aspect_ratio=lip_gap / mouth_width if mouth_width > 0 else 0.0,
        ear_left=_dist(p["left_eye_upper"], p["left_eye_lower"]) / eye_w_left
        if eye_w_left > 0
        else 0.0,
        ear_right=_dist(p["right_eye_upper"], p["right_eye_lower"]) / eye_w_right
        if eye_w_right > 0
        else 0.0,
        brow_left=_dist(p["left_brow"], left_eye) / interocular,
        brow_right=_dist(p["right_brow"], right_eye) / interocular,
        smile_width=mouth_width / interocular,
        interocular=interocular,
    )
