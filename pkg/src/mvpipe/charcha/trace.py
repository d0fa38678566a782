"""Deterministic trace replay for audit and testing.

A trace is newline-delimited JSON: an optional leading
{"type": "session", "rng_seed": N} record, then frame records matching the
wire schema ({"type": "frame", t_ms, face_present, points}). Bare
{"type": "tick", "t_ms": N} records advance the clock without a frame.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .landmarks import LandmarkFrame
from .session import CharchaSession, SessionConfig


class TraceError(ValueError):
    """Malformed trace file; the message carries the offending line number."""


def replay_lines(
    lines: Iterable[str],
    rng_seed: int | None = None,
    config: SessionConfig | None = None,
    session_id: str = "replay",
) -> tuple[dict, list[dict]]:
    """Replay a trace; returns (report, all emitted server messages)."""
    session = None
    events: list[dict] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise TraceError(f"line {lineno}: invalid JSON ({e.msg})") from e
        kind = record.get("type")
        if kind == "session":
            if session is not None:
                raise TraceError(f"line {lineno}: duplicate session header")
            rng_seed = int(record["rng_seed"])
            continue
        if session is None:
            if rng_seed is None:
                raise TraceError(
                    f"line {lineno}: no session header and no rng_seed supplied"
                )
            session = CharchaSession(session_id, rng_seed, config)
        try:
            if kind == "frame":
                events.extend(session.process_frame(LandmarkFrame.from_message(record)))
            elif kind == "tick":
                events.extend(session.tick(int(record["t_ms"])))
            else:
                raise TraceError(f"line {lineno}: unknown record type {kind!r}")
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, TraceError):
                raise
            raise TraceError(f"line {lineno}: bad record ({e})") from e
    if session is None:
        raise TraceError("trace contains no frames")
    events.extend(session.finish())
    return session.report(), events


def replay_trace(
    path: str | Path,
    rng_seed: int | None = None,
    config: SessionConfig | None = None,
) -> tuple[dict, list[dict]]:
    with open(path) as f:
        return replay_lines(f, rng_seed=rng_seed, config=config)


def write_trace(
    path: str | Path, rng_seed: int, frames: Iterable[LandmarkFrame]
) -> None:
    with open(path, "w") as f:
        f.write(json.dumps({"type": "session", "rng_seed": rng_seed}) + "\n")
        for frame in frames:
            f.write(json.dumps(frame.to_message()) + "\n")
