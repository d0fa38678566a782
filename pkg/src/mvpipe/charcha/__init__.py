from .actions import (
    ActionKind,
    CalibrationProfile,
    DetectionThresholds,
    detect_action,
    detect_measures,
    select_actions,
)
from .calibration import CalibrationError, calibrate, calibrate_measures
from .landmarks import REQUIRED_POINTS, FaceMeasures, LandmarkFrame, measures_from_frame
from .session import ActionScore, CharchaSession, Phase, SessionConfig
from .spoof import spoof_checks
from .trace import TraceError, replay_lines, replay_trace, write_trace

__all__ = [
    "ActionKind",
    "CalibrationProfile",
    "DetectionThresholds",
    "detect_action",
    "detect_measures",
    "select_actions",
    "CalibrationError",
    "calibrate",
    "calibrate_measures",
    "REQUIRED_POINTS",
    "FaceMeasures",
    "LandmarkFrame",
    "measures_from_frame",
    "ActionScore",
    "CharchaSession",
    "Phase",
    "SessionConfig",
    "spoof_checks",
    "TraceError",
    "replay_lines",
    "replay_trace",
    "write_trace",
]
