"""Spherical interpolation and rhythm-driven frame weight scheduling.

Each timeline segment gets one keyframe latent; frames inside the segment
interpolate toward the next segment's keyframe with weights that follow
the onset-strength envelope: cumulative onset mass produces fast weight
motion on beat-heavy stretches and slow motion on quiet ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio.spectral import OnsetEnvelope
from .timeline import PromptScript

COLINEAR_EPS = 1e-7
FLOOR_FRACTION = 1e-3
ABSOLUTE_FLOOR = 1e-6


def slerp(v0: np.ndarray, v1: np.ndarray, t: float) -> np.ndarray:
    """Spherical interpolation between v0 and v1 at fraction t in [0, 1].

    Near-colinear inputs (|cos angle| > 1 - 1e-7) fall back to linear
    interpolation rescaled to the interpolated norm.
    """
    v0 = np.asarray(v0, dtype=np.float64)
    v1 = np.asarray(v1, dtype=np.float64)
    if v0.shape != v1.shape:
        raise ValueError(f"dimension mismatch: {v0.shape} vs {v1.shape}")
    n0 = np.linalg.norm(v0)
    n1 = np.linalg.norm(v1)
    if n0 == 0 or n1 == 0:
        raise ValueError("slerp endpoints must be nonzero")
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t must lie in [0, 1], got {t}")
    cos = float(np.dot(v0, v1) / (n0 * n1))
    if abs(cos) > 1.0 - COLINEAR_EPS:
        out = (1.0 - t) * v0 + t * v1
        norm = np.linalg.norm(out)
        if norm == 0:  # antipodal midpoint; direction is arbitrary
            return v0 * 0.0
        target = (1.0 - t) * n0 + t * n1
        return out * (target / norm)
    theta = np.arccos(np.clip(cos, -1.0, 1.0))
    s = np.sin(theta)
    return (np.sin((1.0 - t) * theta) / s) * v0 + (np.sin(t * theta) / s) * v1


def onset_weights(
    envelope_slice: np.ndarray, n_frames: int, floor: float | None = None
) -> np.ndarray:
    """Monotone interpolation weights from onset mass over one segment.

    The envelope slice is resampled to n_frames, an additive floor keeps
    silent stretches moving, and the normalized cumulative sum is re-based
    so the first weight is exactly 0 and the last exactly 1.
    """
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    if n_frames == 1:
        return np.array([1.0])
    env = np.asarray(envelope_slice, dtype=np.float64)
    if len(env) == 0:
        env = np.zeros(n_frames)
    if len(env) == 1:
        env = np.repeat(env, 2)
    if floor is None:
        peak = env.max()
        floor = FLOOR_FRACTION * peak if peak > 0 else ABSOLUTE_FLOOR
    resampled = np.interp(
        np.linspace(0.0, len(env) - 1.0, n_frames), np.arange(len(env)), env
    )
    cum = np.cumsum(resampled + floor)
    w = cum / cum[-1]
    w = (w - w[0]) / (1.0 - w[0])
    return w


@dataclass(frozen=True)
class FrameEntry:
    time: float
    segment_index: int
    keyframe_pair: tuple[int, int]
    weight: float


@dataclass(frozen=True)
class FrameSchedule:
    fps: float
    entries: tuple[FrameEntry, ...]

    @property
    def n_keyframes(self) -> int:
        """Keyframes needed: one per segment plus the closing keyframe."""
        if not self.entries:
            return 0
        return max(e.keyframe_pair[1] for e in self.entries) + 1

    def to_dict(self) -> dict:
        return {
            "fps": self.fps,
            "entries": [
                {
                    "time": e.time,
                    "segment_index": e.segment_index,
                    "keyframe_pair": list(e.keyframe_pair),
                    "weight": e.weight,
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FrameSchedule":
        return cls(
            fps=d["fps"],
            entries=tuple(
                FrameEntry(
                    time=e["time"],
                    segment_index=e["segment_index"],
                    keyframe_pair=tuple(e["keyframe_pair"]),
                    weight=e["weight"],
                )
                for e in d["entries"]
            ),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: str | Path) -> "FrameSchedule":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def build_frame_schedule(
    script: PromptScript, fps: float, envelope: OnsetEnvelope
) -> FrameSchedule:
    """Per-frame keyframe pairs and interpolation weights for a whole script.

    Segment i interpolates keyframes (i, i+1); the final segment targets a
    regenerated closing keyframe of itself. Per-segment frame counts use
    round-half-up with drift corrected on the last segment so the total is
    exactly round(duration * fps).
    """
    if fps <= 0:
        raise ValueError("fps must be positive")
    if not script.segments:
        return FrameSchedule(fps=fps, entries=())
    duration = script.duration
    env_duration = len(envelope.values) / envelope.frame_rate
    if env_duration + 1.0 / envelope.frame_rate < duration:
        raise ValueError(
            f"onset envelope covers {env_duration:.2f}s but the script "
            f"needs {duration:.2f}s"
        )
    total_frames = _round_half_up(duration * fps)
    counts = [
        max(1, _round_half_up((s.end - s.start) * fps)) for s in script.segments
    ]
    counts[-1] = max(1, total_frames - sum(counts[:-1]))

    entries: list[FrameEntry] = []
    frame_idx = 0
    for i, seg in enumerate(script.segments):
        lo = int(seg.start * envelope.frame_rate)
        hi = max(lo + 1, int(seg.end * envelope.frame_rate))
        weights = onset_weights(envelope.values[lo:hi], counts[i])
        for w in weights:
            entries.append(
                FrameEntry(
                    time=frame_idx / fps,
                    segment_index=i,
                    keyframe_pair=(i, i + 1),
                    weight=float(w),
                )
            )
            frame_idx += 1
    return FrameSchedule(fps=fps, entries=tuple(entries))
