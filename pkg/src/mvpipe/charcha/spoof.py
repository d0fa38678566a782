"""Advisory spoof heuristics over a session's frame history.

Flags are reported with the verdict for an operator's benefit; they never
change pass/fail.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .landmarks import REQUIRED_POINTS, LandmarkFrame

STATIC_WINDOW_MS = 3000
STATIC_VARIANCE_FLOOR = 1e-7
STATIC_MIN_FRAMES = 10
PRESENCE_DUTY_FLOOR = 0.7
INTEROCULAR_JUMP_RATIO = 0.4

FLAG_STATIC = "static input"
FLAG_INTERMITTENT = "intermittent presence"
FLAG_FACE_SWAP = "face swap discontinuity"
FLAG_STREAM_GAP = "stream gap"


def spoof_checks(frames: Sequence[LandmarkFrame]) -> list[str]:
    """Static-photo, intermittent-presence, and face-swap heuristics."""
    flags: list[str] = []
    if not frames:
        return flags

    present = [f for f in frames if f.has_required_points()]
    duty = len([f for f in frames if f.face_present]) / len(frames)
    if duty < PRESENCE_DUTY_FLOOR:
        flags.append(FLAG_INTERMITTENT)

    # Static input: landmark variance over any 3 s window below the floor.
    times = np.array([f.t_ms for f in present])
    if len(present) >= STATIC_MIN_FRAMES:
        coords = np.array(
            [[c for n in REQUIRED_POINTS for c in f.points[n][:2]] for f in present]
        )
        # prefix sums make each window's per-coordinate variance O(1)
        ps = np.vstack([np.zeros(coords.shape[1]), np.cumsum(coords, axis=0)])
        ps2 = np.vstack([np.zeros(coords.shape[1]), np.cumsum(coords**2, axis=0)])
        start = 0
        for end in range(len(present)):
            while times[end] - times[start] > STATIC_WINDOW_MS:
                start += 1
            n = end - start + 1
            if n >= STATIC_MIN_FRAMES and times[end] - times[start] >= STATIC_WINDOW_MS - 1:
                mean = (ps[end + 1] - ps[start]) / n
                var = (ps2[end + 1] - ps2[start]) / n - mean**2
                if var.max() < STATIC_VARIANCE_FLOOR:
                    flags.append(FLAG_STATIC)
                    break

    # Face-swap: interocular distance jumping >40% between consecutive frames.
    inter = []
    for f in present:
        p = f.points
        lx = (p["left_eye_outer"][0] + p["left_eye_inner"][0]) / 2
        ly = (p["left_eye_outer"][1] + p["left_eye_inner"][1]) / 2
        rx = (p["right_eye_outer"][0] + p["right_eye_inner"][0]) / 2
        ry = (p["right_eye_outer"][1] + p["right_eye_inner"][1]) / 2
        inter.append(((rx - lx) ** 2 + (ry - ly) ** 2) ** 0.5)
    for a, b in zip(inter, inter[1:]):
        if a > 0 and abs(b - a) / a > INTEROCULAR_JUMP_RATIO:
            flags.append(FLAG_FACE_SWAP)
            break
    return flags
