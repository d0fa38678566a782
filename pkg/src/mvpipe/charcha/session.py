"""The CHARCHA session state machine.

Timeline (all on the session-relative frame clock, never wall time):
calibration (2 s) -> 6 x [prepare (5 s) + action window (<= 10 s)] ->
verdict. Action windows score one boolean per one-second sub-interval (a
second passes when at least half its frames satisfy the action predicate)
and end early once six sub-intervals have passed. A failed first attempt
earns exactly one retry with a fresh action order; a second failure is
terminal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .actions import (
    ActionKind,
    CalibrationProfile,
    DetectionThresholds,
    detect_measures,
    select_actions,
)
from .calibration import calibrate_measures
from .landmarks import LandmarkFrame, measures_from_frame
from .spoof import FLAG_STREAM_GAP, spoof_checks


class Phase(Enum):
    CALIBRATING = "calibrating"
    PREPARE = "prepare"
    ACTION_WINDOW = "action_window"
    BETWEEN_ATTEMPTS = "between_attempts"
    PASSED = "passed"
    FAILED = "failed"


@dataclass(frozen=True)
class SessionConfig:
    calibration_ms: int = 2000
    prepare_ms: int = 5000
    window_ms: int = 10000
    seconds_per_window: int = 10
    pass_score: int = 6
    actions_per_attempt: int = 6
    max_attempts: int = 2
    min_calibration_frames: int = 10
    gap_ms: int = 3000
    thresholds: DetectionThresholds = field(default_factory=DetectionThresholds)


@dataclass(frozen=True)
class ActionScore:
    action: ActionKind
    per_second: tuple[bool, ...]

    @property
    def score(self) -> int:
        return sum(self.per_second)

    @property
    def passed(self) -> bool:
        return self.score >= 6

    def to_dict(self) -> dict:
        return {
            "action": self.action.value,
            "per_second": list(self.per_second),
            "score": self.score,
            "passed": self.passed,
        }


def score_action(action: ActionKind, detections: list[bool]) -> ActionScore:
    """Score a window from its per-second detections, padded to 10 entries."""
    if len(detections) > 10:
        raise ValueError("at most 10 one-second sub-intervals per window")
    padded = tuple(detections) + (False,) * (10 - len(detections))
    return ActionScore(action=action, per_second=padded)


class ProtocolError(RuntimeError):
    """Client violated the session protocol (e.g. clock regression)."""


def _attempt_seed(rng_seed: int, attempt: int) -> int:
    return rng_seed * 1000003 + (attempt - 1)


class CharchaSession:
    """Single-writer FSM; feed frames (or bare clock ticks) in time order."""

    def __init__(self, session_id: str, rng_seed: int, config: SessionConfig | None = None):
        self.id = session_id
        self.rng_seed = rng_seed
        self.config = config or SessionConfig()
        self.phase = Phase.CALIBRATING
        self.phase_start = 0
        self.clock = 0
        self.attempt = 1
        self.attempt_start = 0
        self.attempt_durations_ms: list[int] = []
        self.profile: CalibrationProfile | None = None
        self.actions: list[ActionKind] = select_actions(
            _attempt_seed(rng_seed, 1), self.config.actions_per_attempt
        )
        self.action_idx = 0
        self.scores: list[ActionScore] = []
        self.snapshots: list[str] = []
        self.spoof_flags: list[str] = []
        self.verdict: bool | None = None
        self.failure_reason: str | None = None
        self._cal_measures = []
        self._cal_retried = False
        self._frames: list[LandmarkFrame] = []
        self._per_second: list[bool] = []
        self._sec_idx = 0
        self._frames_in_sec = 0
        self._hits_in_sec = 0
        self._passes = 0
        self._snapshot_taken = False
        self._last_frame_t: int | None = None
        self._flags_cache: list[str] | None = None

    # -- public API ---------------------------------------------------------

    @property
    def terminal(self) -> bool:
        return self.phase in (Phase.PASSED, Phase.FAILED)

    def process_frame(self, frame: LandmarkFrame) -> list[dict]:
        """Consume one landmark frame; returns server-to-client messages."""
        events: list[dict] = []
        if self.terminal:
            return events
        if frame.t_ms < self.clock:
            self._fail("clock violation", events)
            return events
        self._frames.append(frame)
        self._advance(frame.t_ms, events)
        self.clock = frame.t_ms
        if self.terminal:
            return events

        if self.phase is Phase.CALIBRATING:
            m = measures_from_frame(frame)
            if m is not None:
                self._cal_measures.append(m)
        elif self.phase is Phase.ACTION_WINDOW:
            if (
                self._last_frame_t is not None
                and frame.t_ms - self._last_frame_t > self.config.gap_ms
                and FLAG_STREAM_GAP not in self.spoof_flags
            ):
                self.spoof_flags.append(FLAG_STREAM_GAP)
            self._last_frame_t = frame.t_ms
            self._frames_in_sec += 1
            m = measures_from_frame(frame)
            if m is not None and detect_measures(
                m, self.profile, self.actions[self.action_idx], self.config.thresholds
            ):
                self._hits_in_sec += 1
                if not self._snapshot_taken:
                    self._snapshot_taken = True
                    tag = self.actions[self.action_idx].value
                    self.snapshots.append(tag)
                    events.append({"type": "capture_request", "tag": tag})
        return events

    def tick(self, t_ms: int) -> list[dict]:
        """Advance the FSM clock without a frame."""
        events: list[dict] = []
        if self.terminal:
            return events
        if t_ms < self.clock:
            self._fail("clock violation", events)
            return events
        self._advance(t_ms, events)
        self.clock = max(self.clock, t_ms)
        return events

    def finish(self) -> list[dict]:
        """Signal end of the frame stream; unterminated sessions fail."""
        events: list[dict] = []
        if not self.terminal:
            self._fail("stream ended", events)
        return events

    def abort(self, reason: str) -> list[dict]:
        """Administrative failure (e.g. server shutdown)."""
        events: list[dict] = []
        if not self.terminal:
            self._fail(reason, events)
        return events

    def report(self) -> dict:
        return {
            "session": self.id,
            "passed": bool(self.verdict),
            "failure_reason": self.failure_reason,
            "attempt": self.attempt,
            "scores": [s.to_dict() for s in self.scores],
            "spoof_flags": self._all_flags(),
            "snapshots": list(self.snapshots),
            "attempt_durations_ms": list(self.attempt_durations_ms),
        }

    # -- phase machinery ----------------------------------------------------

    def _advance(self, t: int, events: list[dict]) -> None:
        while not self.terminal:
            if self.phase is Phase.CALIBRATING:
                boundary = self.phase_start + self.config.calibration_ms
                if t < boundary:
                    return
                self._finish_calibration(boundary, events)
            elif self.phase is Phase.PREPARE:
                boundary = self.phase_start + self.config.prepare_ms
                if t < boundary:
                    return
                self._start_window(boundary)
            elif self.phase is Phase.ACTION_WINDOW:
                boundary = self.phase_start + 1000 * (self._sec_idx + 1)
                if t < boundary:
                    return
                self._finish_second(events)
            elif self.phase is Phase.BETWEEN_ATTEMPTS:
                self._start_attempt(self.phase_start)
            else:
                return

    def _finish_calibration(self, boundary: int, events: list[dict]) -> None:
        if len(self._cal_measures) >= self.config.min_calibration_frames:
            self.profile = calibrate_measures(
                self._cal_measures, self.config.min_calibration_frames
            )
            self.snapshots.append("neutral")
            events.append({"type": "capture_request", "tag": "neutral"})
            self._enter_prepare(boundary, events)
        elif not self._cal_retried:
            # One calibration restart; the attempt clock restarts with it.
            self._cal_retried = True
            self._cal_measures = []
            self.phase_start = boundary
            self.attempt_start = boundary
        else:
            self._fail("no stable face", events)

    def _enter_prepare(self, boundary: int, events: list[dict]) -> None:
        self.phase = Phase.PREPARE
        self.phase_start = boundary
        action = self.actions[self.action_idx]
        events.append(
            {
                "type": "prompt",
                "action": action.value,
                "deadline_ms": boundary + self.config.prepare_ms + self.config.window_ms,
            }
        )

    def _start_window(self, boundary: int) -> None:
        self.phase = Phase.ACTION_WINDOW
        self.phase_start = boundary
        self._per_second = []
        self._sec_idx = 0
        self._frames_in_sec = 0
        self._hits_in_sec = 0
        self._passes = 0
        self._snapshot_taken = False
        self._last_frame_t = None

    def _finish_second(self, events: list[dict]) -> None:
        hit = self._frames_in_sec > 0 and 2 * self._hits_in_sec >= self._frames_in_sec
        self._per_second.append(hit)
        events.append(
            {"type": "second_score", "second": self._sec_idx, "hit": hit}
        )
        if hit:
            self._passes += 1
        self._sec_idx += 1
        self._frames_in_sec = 0
        self._hits_in_sec = 0
        secured = self._passes >= self.config.pass_score
        if secured or self._sec_idx >= self.config.seconds_per_window:
            boundary = self.phase_start + 1000 * self._sec_idx
            padding = self.config.seconds_per_window - len(self._per_second)
            self.scores.append(
                ActionScore(
                    action=self.actions[self.action_idx],
                    per_second=tuple(self._per_second + [False] * padding),
                )
            )
            self.action_idx += 1
            if self.action_idx < self.config.actions_per_attempt:
                self._enter_prepare(boundary, events)
            else:
                self._deliver_verdict(boundary, events)

    def _deliver_verdict(self, boundary: int, events: list[dict]) -> None:
        self.attempt_durations_ms.append(boundary - self.attempt_start)
        if all(s.passed for s in self.scores):
            self.phase = Phase.PASSED
            self.verdict = True
            events.append(self._verdict_event())
        elif self.attempt < self.config.max_attempts:
            self.phase = Phase.BETWEEN_ATTEMPTS
            self.phase_start = boundary
        else:
            self._fail("actions failed", events)

    def _start_attempt(self, t: int) -> None:
        self.attempt += 1
        self.attempt_start = t
        self.profile = None
        self._cal_measures = []
        self._cal_retried = False
        self.actions = select_actions(
            _attempt_seed(self.rng_seed, self.attempt), self.config.actions_per_attempt
        )
        self.action_idx = 0
        self.scores = []
        self.snapshots = []
        self.phase = Phase.CALIBRATING
        self.phase_start = t

    def _fail(self, reason: str, events: list[dict]) -> None:
        self.phase = Phase.FAILED
        self.verdict = False
        self.failure_reason = reason
        events.append(self._verdict_event())

    def _all_flags(self) -> list[str]:
        # frame history is frozen once terminal, so the scan is cacheable
        if self._flags_cache is not None:
            return list(self._flags_cache)
        flags = list(self.spoof_flags)
        for flag in spoof_checks(self._frames):
            if flag not in flags:
                flags.append(flag)
        if self.terminal:
            self._flags_cache = list(flags)
        return flags

    def _verdict_event(self) -> dict:
        return {
            "type": "verdict",
            "passed": bool(self.verdict),
            "failure_reason": self.failure_reason,
            "scores": [s.to_dict() for s in self.scores],
            "spoof_flags": self._all_flags(),
        }
