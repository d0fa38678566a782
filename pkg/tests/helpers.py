"""Shared synthetic fixtures: audio signals and scripted landmark traces."""

from __future__ import annotations

import numpy as np

from mvpipe.audio.buffer import ANALYSIS_SAMPLE_RATE, AudioBuffer
from mvpipe.charcha.actions import ActionKind
from mvpipe.charcha.landmarks import LandmarkFrame
from mvpipe.charcha.session import CharchaSession, Phase, SessionConfig

SR = ANALYSIS_SAMPLE_RATE


# -- audio ---------------------------------------------------------------


def silence(duration: float, sr: int = SR) -> AudioBuffer:
    return AudioBuffer(samples=np.zeros(int(duration * sr)), sample_rate=sr)


def sine(freq: float, duration: float, sr: int = SR, amp: float = 0.5) -> AudioBuffer:
    t = np.arange(int(duration * sr)) / sr
    return AudioBuffer(samples=amp * np.sin(2 * np.pi * freq * t), sample_rate=sr)


def click_track(bpm: float, duration: float, sr: int = SR) -> AudioBuffer:
    """Impulse clicks on the beat over silence."""
    samples = np.zeros(int(duration * sr))
    period = 60.0 / bpm
    t = 0.0
    while t < duration:
        idx = int(t * sr)
        if idx < len(samples):
            samples[idx] = 1.0
        t += period
    return AudioBuffer(samples=samples, sample_rate=sr)


def white_noise(duration: float, sr: int = SR, seed: int = 0) -> AudioBuffer:
    rng = np.random.default_rng(seed)
    return AudioBuffer(
        samples=0.5 * rng.uniform(-1, 1, int(duration * sr)), sample_rate=sr
    )


# -- synthetic face -------------------------------------------------------

NEUTRAL_POINTS = {
    "nose_tip": (0.50, 0.55, 0.0),
    "chin": (0.50, 0.75, 0.0),
    "left_eye_outer": (0.30, 0.40, 0.0),
    "left_eye_inner": (0.38, 0.40, 0.0),
    "right_eye_outer": (0.70, 0.40, 0.0),
    "right_eye_inner": (0.62, 0.40, 0.0),
    "left_eye_upper": (0.34, 0.385, 0.0),
    "left_eye_lower": (0.34, 0.415, 0.0),
    "right_eye_upper": (0.66, 0.385, 0.0),
    "right_eye_lower": (0.66, 0.415, 0.0),
    "left_mouth_corner": (0.42, 0.65, 0.0),
    "right_mouth_corner": (0.58, 0.65, 0.0),
    "upper_lip": (0.50, 0.64, 0.0),
    "lower_lip": (0.50, 0.66, 0.0),
    "left_brow": (0.34, 0.33, 0.0),
    "right_brow": (0.66, 0.33, 0.0),
    "face_oval_left": (0.22, 0.50, 0.0),
    "face_oval_right": (0.78, 0.50, 0.0),
}

# interocular distance of the neutral face above
INTEROCULAR = 0.32


def face_points(action: ActionKind | None = None) -> dict:
    """Neutral landmarks, optionally deformed to perform one action."""
    p = {k: list(v) for k, v in NEUTRAL_POINTS.items()}
    if action is ActionKind.TURN_LEFT:
        p["nose_tip"][0] -= 0.30 * INTEROCULAR
    elif action is ActionKind.TURN_RIGHT:
        p["nose_tip"][0] += 0.30 * INTEROCULAR
    elif action is ActionKind.LOOK_UP:
        p["nose_tip"][1] -= 0.30 * INTEROCULAR
    elif action is ActionKind.SMILE:
        p["left_mouth_corner"][0] -= 0.024
        p["right_mouth_corner"][0] += 0.024
    elif action is ActionKind.OPEN_MOUTH:
        p["lower_lip"][1] += 0.04
        p["chin"][1] += 0.04
    elif action is ActionKind.RAISE_EYEBROWS:
        p["left_brow"][1] -= 0.03
        p["right_brow"][1] -= 0.03
    elif action is ActionKind.WINK:
        p["left_eye_upper"][1] = 0.395
        p["left_eye_lower"][1] = 0.405
    return {k: tuple(v) for k, v in p.items()}


def make_frame(
    t_ms: int,
    action: ActionKind | None = None,
    jitter_rng: np.random.Generator | None = None,
    jitter_sigma: float = 0.002,
    face_present: bool = True,
    scale: float = 1.0,
) -> LandmarkFrame:
    if not face_present:
        return LandmarkFrame(t_ms=t_ms, face_present=False, points={})
    points = face_points(action)
    if scale != 1.0:
        points = {
            k: (0.5 + (x - 0.5) * scale, 0.5 + (y - 0.5) * scale, z)
            for k, (x, y, z) in points.items()
        }
    if jitter_rng is not None:
        points = {
            k: (
                x + jitter_rng.normal(0, jitter_sigma),
                y + jitter_rng.normal(0, jitter_sigma),
                z,
            )
            for k, (x, y, z) in points.items()
        }
    return LandmarkFrame(t_ms=t_ms, face_present=True, points=points)


def drive_session(
    seed: int,
    targets,
    config: SessionConfig | None = None,
    frame_interval_ms: int = 50,
    jitter_seed: int | None = 7,
    stop_at_attempt: int | None = None,
    max_ms: int = 400_000,
):
    """Run a scripted session: perform each prompted action for the first
    `targets[attempt-1][action_idx]` seconds of its window.

    Returns (session, frames, events). The frame list replays to the same
    verdict because phase advancement depends only on frame timestamps.
    """
    config = config or SessionConfig()
    session = CharchaSession("scripted", seed, config)
    rng = np.random.default_rng(jitter_seed) if jitter_seed is not None else None
    frames: list[LandmarkFrame] = []
    events: list[dict] = []
    t = 0
    while not session.terminal and t < max_ms:
        events.extend(session.tick(t))
        if stop_at_attempt is not None and session.attempt >= stop_at_attempt:
            break
        if session.terminal:
            action = None
        elif session.phase is Phase.ACTION_WINDOW:
            sec = (t - session.phase_start) // 1000
            target = targets[session.attempt - 1][session.action_idx]
            action = session.actions[session.action_idx] if sec < target else None
        else:
            action = None
        frame = make_frame(t, action, jitter_rng=rng)
        events.extend(session.process_frame(frame))
        frames.append(frame)
        t += frame_interval_ms
    return session, frames, events


FULL_PASS = [[10] * 6, [10] * 6]
EXACT_SIX = [[6] * 6, [6] * 6]
ONE_SHORT = [[5] + [10] * 5, [5] + [10] * 5]
