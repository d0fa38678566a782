"""Neutral-pose calibration from the opening seconds of a session."""

from __future__ import annotations

import statistics
from typing import Sequence

from .actions import CalibrationProfile
from .landmarks import FaceMeasures, LandmarkFrame, measures_from_frame

MIN_CALIBRATION_FRAMES = 10


class CalibrationError(ValueError):
    """Not enough stable face-present frames to calibrate."""


def calibrate_measures(
    measures: Sequence[FaceMeasures], min_frames: int = MIN_CALIBRATION_FRAMES
) -> CalibrationProfile:
    """Median-aggregate per-frame measures into a calibration profile."""
    if len(measures) < min_frames:
        raise CalibrationError(
            f"need at least {min_frames} face-present frames to calibrate, "
            f"got {len(measures)}"
        )
    med = lambda attr: statistics.median(getattr(m, attr) for m in measures)
    return CalibrationProfile(
        neutral_yaw=med("yaw"),
        neutral_pitch=med("pitch"),
        mouth_aspect_ratio=med("mouth_aspect_ratio"),
        ear_left=med("ear_left"),
        ear_right=med("ear_right"),
        brow_left=med("brow_left"),
        brow_right=med("brow_right"),
        smile_width=med("smile_width"),
        interocular=med("interocular"),
    )


def calibrate(
    frames: Sequence[LandmarkFrame], min_frames: int = MIN_CALIBRATION_FRAMES
) -> CalibrationProfile:
    """Calibrate from raw frames; faceless frames are skipped."""
    measures = [m for m in map(measures_from_frame, frames) if m is not None]
    return calibrate_measures(measures, min_frames)
