"""Challenge actions, detection predicates, and randomized selection."""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

from .landmarks import FaceMeasures, LandmarkFrame, measures_from_frame


class ActionKind(Enum):
    TURN_LEFT = "turn_left"
    TURN_RIGHT = "turn_right"
    LOOK_UP = "look_up"
    SMILE = "smile"
    OPEN_MOUTH = "open_mouth"
    RAISE_EYEBROWS = "raise_eyebrows"
    WINK = "wink"


@dataclass(frozen=True)
class DetectionThresholds:
    """Calibration-relative thresholds; tune via config, not code."""

    yaw_delta: float = 0.25
    pitch_delta: float = 0.20
    smile_width_ratio: float = 1.15
    mouth_open_ratio: float = 2.0
    brow_raise_ratio: float = 1.25
    wink_closed_ratio: float = 0.45
    wink_open_ratio: float = 0.8


@dataclass(frozen=True)
class CalibrationProfile:
    """Per-user neutral baselines (medians over the calibration window)."""

    neutral_yaw: float
    neutral_pitch: float
    mouth_aspect_ratio: float
    ear_left: float
    ear_right: float
    brow_left: float
    brow_right: float
    smile_width: float
    interocular: float


def select_actions(rng_seed: int, count: int = 6) -> list[ActionKind]:
    """Deterministic random ordering of `count` distinct actions."""
    rng = random.Random(rng_seed)
    return rng.sample(list(ActionKind), count)


def detect_measures(
    m: FaceMeasures,
    profile: CalibrationProfile,
    kind: ActionKind,
    th: DetectionThresholds = DetectionThresholds(),
) -> bool:
    """Action predicate on precomputed measures against the calibration."""
    if kind is ActionKind.TURN_LEFT:
        return m.yaw - profile.neutral_yaw <= -th.yaw_delta
    if kind is ActionKind.TURN_RIGHT:
        return m.yaw - profile.neutral_yaw >= th.yaw_delta
    if kind is ActionKind.LOOK_UP:
        return m.pitch - profile.neutral_pitch >= th.pitch_delta
    if kind is ActionKind.SMILE:
        return (
            m.smile_width >= th.smile_width_ratio * profile.smile_width
            and m.mouth_aspect_ratio
            < th.mouth_open_ratio * profile.mouth_aspect_ratio
        )
    if kind is ActionKind.OPEN_MOUTH:
        return m.mouth_aspect_ratio >= th.mouth_open_ratio * profile.mouth_aspect_ratio
    if kind is ActionKind.RAISE_EYEBROWS:
        return (
            m.brow_left >= th.brow_raise_ratio * profile.brow_left
            and m.brow_right >= th.brow_raise_ratio * profile.brow_right
        )
    if kind is ActionKind.WINK:
        left_closed = m.ear_left <= th.wink_closed_ratio * profile.ear_left
        right_closed = m.ear_right <= th.wink_closed_ratio * profile.ear_right
        left_open = m.ear_left >= th.wink_open_ratio * profile.ear_left
        right_open = m.ear_right >= th.wink_open_ratio * profile.ear_right
        return (left_closed and right_open) or (right_closed and left_open)
    raise ValueError(f"unknown action: {kind}")


def detect_action(
    frame: LandmarkFrame,
    profile: CalibrationProfile,
    kind: ActionKind,
    th: DetectionThresholds = DetectionThresholds(),
) -> bool:
    """Frame-level predicate; a missing face is simply a non-detection."""
    m = measures_from_frame(frame)
    if m is None:
        return False
    return detect_measures(m, profile, kind, th)
