"""Timeline compilation: lyrics + emotion events + beats -> PromptScript.

Boundaries come from every lyric or emotion change, get snapped to nearby
beats, and the resulting segments are filled with LLM-written scene
prompts plus emotion/style/negative prompt components.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .audio.pulse import BeatGrid
from .emotion import EmotionEvent, EmotionQuadrant
from .llm import LlmClient, LlmError

SNAP_TOLERANCE = 0.25
MIN_SEGMENT_DURATION = 0.5

DEFAULT_NEGATIVE_PROMPT = (
    "nudity, explicit content, nsfw, gore, violence, "
    "harmful stereotypes, racist caricature, oversexualized, "
    "deformed hands, watermark, text"
)

EMOTION_PHRASES = {
    EmotionQuadrant.MELANCHOLY: "melancholy, somber, muted tones",
    EmotionQuadrant.SERENE: "serene, calm, soft ambient light",
    EmotionQuadrant.TENSE: "tense, dramatic atmosphere",
    EmotionQuadrant.EUPHORIC: "euphoric, radiant, vibrant energy",
}

PROMPT_SYSTEM_INSTRUCTION = (
    "You are a storyboard writer for a music video. You will receive a "
    "numbered list of timestamped lyric lines, each with an emotion label. "
    "For every item, write exactly one vivid visual scene description that "
    "continues a single coherent narrative across the whole song. Evoke the "
    "meaning of the lyric rather than restating it literally. Items marked "
    "[instrumental] have no lyric; describe a mood-driven scene. Reply with "
    "one numbered line per item, nothing else."
)


class TranscriptError(ValueError):
    """Malformed or non-monotonic transcript input."""


@dataclass(frozen=True)
class LyricEvent:
    start: float
    end: float
    text: str

    def __post_init__(self):
        if self.start >= self.end:
            raise TranscriptError(f"lyric event start {self.start} >= end {self.end}")


@dataclass(frozen=True)
class MergedInterval:
    start: float
    end: float
    lyric: str | None
    emotion: EmotionQuadrant


@dataclass(frozen=True)
class TimelineSegment:
    start: float
    end: float
    lyric: str | None
    emotion: EmotionQuadrant
    prompt: str
    negative_prompt: str
    style_tags: tuple[str, ...]
    seed: int


@dataclass(frozen=True)
class ScriptConfig:
    """Global knobs shared by every segment of one render."""

    style_preset: str = "default"
    style_tags: tuple[str, ...] = ("cinematic", "highly detailed")
    character_token: str | None = None
    checkpoint_id: str = "base"
    lora_id: str | None = None
    lora_scale: float = 0.8
    negative_prompt: str = DEFAULT_NEGATIVE_PROMPT
    job_seed: int = 0

    def __post_init__(self):
        if (self.character_token is None) != (self.lora_id is None):
            raise ValueError(
                "character_token must be configured iff a character LoRA is"
            )
        if self.lora_id is not None and not (0 < self.lora_scale <= 1):
            raise ValueError("lora_scale must lie in (0, 1]")


@dataclass(frozen=True)
class PromptScript:
    segments: tuple[TimelineSegment, ...]
    config: ScriptConfig
    degraded: bool = False  # template prompts used after an LLM failure

    @property
    def duration(self) -> float:
        return self.segments[-1].end if self.segments else 0.0

    def to_dict(self) -> dict:
        return {
            "degraded": self.degraded,
            "config": {
                "style_preset": self.config.style_preset,
                "style_tags": list(self.config.style_tags),
                "character_token": self.config.character_token,
                "checkpoint_id": self.config.checkpoint_id,
                "lora_id": self.config.lora_id,
                "lora_scale": self.config.lora_scale,
                "negative_prompt": self.config.negative_prompt,
                "job_seed": self.config.job_seed,
            },
            "segments": [
                {
                    "start": s.start,
                    "end": s.end,
                    "lyric": s.lyric,
                    "emotion": s.emotion.value,
                    "prompt": s.prompt,
                    "negative_prompt": s.negative_prompt,
                    "style_tags": list(s.style_tags),
                    "seed": s.seed,
                }
                for s in self.segments
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PromptScript":
        cfg = d["config"]
        return cls(
            degraded=d.get("degraded", False),
            config=ScriptConfig(
                style_preset=cfg["style_preset"],
                style_tags=tuple(cfg["style_tags"]),
                character_token=cfg["character_token"],
                checkpoint_id=cfg["checkpoint_id"],
                lora_id=cfg["lora_id"],
                lora_scale=cfg["lora_scale"],
                negative_prompt=cfg["negative_prompt"],
                job_seed=cfg["job_seed"],
            ),
            segments=tuple(
                TimelineSegment(
                    start=s["start"],
                    end=s["end"],
                    lyric=s["lyric"],
                    emotion=EmotionQuadrant(s["emotion"]),
                    prompt=s["prompt"],
                    negative_prompt=s["negative_prompt"],
                    style_tags=tuple(s["style_tags"]),
                    seed=s["seed"],
                )
                for s in d["segments"]
            ),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "PromptScript":
        return cls.from_dict(json.loads(Path(path).read_text()))


def parse_transcript(document: dict) -> list[LyricEvent]:
    """Validate an ASR transcript: {"segments": [{start, end, text}, ...]}.

    Whitespace-only texts are dropped; overlapping segments are clipped so
    each ends where the next starts.
    """
    segments = document.get("segments", [])
    bad = [
        i
        for i, s in enumerate(segments)
        if s["start"] < 0 or s["end"] < 0 or s["start"] >= s["end"]
    ]
    starts = [s["start"] for s in segments]
    bad += [i for i in range(1, len(starts)) if starts[i] < starts[i - 1]]
    if bad:
        raise TranscriptError(
            f"invalid transcript segments at indices {sorted(set(bad))}"
        )
    events: list[LyricEvent] = []
    for i, s in enumerate(segments):
        if not s["text"].strip():
            continue
        end = s["end"]
        if i + 1 < len(segments) and end > segments[i + 1]["start"]:
            warnings.warn(
                f"transcript segment {i} overlaps its successor; clipping end "
                f"{end} -> {segments[i + 1]['start']}"
            )
            end = segments[i + 1]["start"]
        events.append(LyricEvent(start=s["start"], end=end, text=s["text"].strip()))
    return events


def _snap(t: float, beats: BeatGrid, tolerance: float) -> float:
    if len(beats) == 0:
        return t
    times = beats.beat_times
    nearest = times[min(range(len(times)), key=lambda i: abs(times[i] - t))]
    return float(nearest) if abs(nearest - t) <= tolerance else t


def merge_events(
    lyrics: Sequence[LyricEvent],
    emotion_events: Sequence[EmotionEvent],
    beats: BeatGrid,
    duration: float,
    snap_tolerance: float = SNAP_TOLERANCE,
    min_segment: float = MIN_SEGMENT_DURATION,
) -> list[MergedInterval]:
    """Segment [0, duration] at every lyric or emotion change, beat-snapped.

    Interior boundaries within snap_tolerance of a beat move onto it; 0 and
    duration stay fixed. Boundaries that collide after snapping merge, and
    intervals shorter than min_segment are absorbed into their neighbor.
    Each interval carries the lyric active at its midpoint (None when
    instrumental) and the latest emotion quadrant (default Serene).
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    raw = {0.0, duration}
    for ev in lyrics:
        raw.update((ev.start, ev.end))
    raw.update(e.time for e in emotion_events)
    raw = {t for t in raw if 0.0 <= t <= duration}

    snapped = set()
    for t in sorted(raw):
        if t in (0.0, duration):
            snapped.add(t)
        else:
            s = _snap(t, beats, snap_tolerance)
            if 0.0 < s < duration:
                snapped.add(s)
    boundaries = sorted(snapped)

    intervals = [
        (boundaries[i], boundaries[i + 1]) for i in range(len(boundaries) - 1)
    ]
    # Absorb too-short intervals into the previous one (or next, for the first).
    merged: list[tuple[float, float]] = []
    for start, end in intervals:
        if merged and (end - start) < min_segment:
            merged[-1] = (merged[-1][0], end)
        else:
            merged.append((start, end))
    while len(merged) > 1 and (merged[0][1] - merged[0][0]) < min_segment:
        merged[:2] = [(merged[0][0], merged[1][1])]

    out = []
    for start, end in merged:
        mid = (start + end) / 2
        lyric = next(
            (ev.text for ev in lyrics if ev.start <= mid < ev.end), None
        )
        active = [e for e in emotion_events if e.time <= mid]
        emotion = active[-1].quadrant if active else EmotionQuadrant.SERENE
        out.append(MergedInterval(start=start, end=end, lyric=lyric, emotion=emotion))
    return out


@dataclass(frozen=True)
class PromptRequest:
    system: str
    user: str
    count: int


def build_prompt_request(
    merged: Sequence[MergedInterval], narrative_hint: str | None = None
) -> PromptRequest:
    """One batched request for the whole song, one numbered item per segment."""
    if not merged:
        raise ValueError("no segments to build a prompt request from")
    lines = []
    if narrative_hint:
        lines.append(f"Narrative hint: {narrative_hint}")
    lines.append(
        f"Write {len(merged)} scene descriptions, one numbered line each:"
    )
    for i, seg in enumerate(merged, start=1):
        lyric = seg.lyric if seg.lyric is not None else "[instrumental]"
        lines.append(
            f"{i}. [t={seg.start:.2f}s] emotion={seg.emotion.value} lyric={lyric}"
        )
    return PromptRequest(
        system=PROMPT_SYSTEM_INSTRUCTION, user="\n".join(lines), count=len(merged)
    )


def parse_prompt_response(text: str, expected: int) -> list[str]:
    """Pull numbered scene lines out of the LLM reply; order by index."""
    found: dict[int, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        head, _, rest = line.partition(".")
        if head.isdigit() and rest.strip():
            found[int(head)] = rest.strip()
    if sorted(found) != list(range(1, expected + 1)):
        raise LlmError(
            f"expected {expected} numbered scene lines, got indices {sorted(found)}"
        )
    return [found[i] for i in range(1, expected + 1)]


def segment_seed(job_seed: int, index: int) -> int:
    """Stable per-segment seed derived from the job seed."""
    h = hashlib.sha256(f"{job_seed}:{index}".encode()).digest()
    return int.from_bytes(h[:8], "big")


def _template_prompt(seg: MergedInterval) -> str:
    subject = seg.lyric if seg.lyric is not None else "instrumental passage"
    return f"{seg.emotion.value} scene: {subject}"


def _assemble(scene: str, seg: MergedInterval, config: ScriptConfig) -> str:
    parts = [scene, EMOTION_PHRASES[seg.emotion]]
    parts.extend(config.style_tags)
    if config.character_token:
        parts.append(config.character_token)
    return ", ".join(parts)


def compile_script(
    merged: Sequence[MergedInterval],
    scene_prompts: Sequence[str] | None,
    config: ScriptConfig,
) -> PromptScript:
    """Attach prompts, negative prompts, style tags, and seeds to segments.

    scene_prompts=None (or a cardinality mismatch upstream) selects the
    degraded template path.
    """
    degraded = scene_prompts is None or len(scene_prompts) != len(merged)
    if degraded and scene_prompts is not None:
        warnings.warn(
            f"scene prompt count {len(scene_prompts)} != segment count "
            f"{len(merged)}; falling back to template prompts"
        )
    segments = []
    for i, seg in enumerate(merged):
        scene = _template_prompt(seg) if degraded else scene_prompts[i]
        segments.append(
            TimelineSegment(
                start=seg.start,
                end=seg.end,
                lyric=seg.lyric,
                emotion=seg.emotion,
                prompt=_assemble(scene, seg, config),
                negative_prompt=config.negative_prompt,
                style_tags=config.style_tags,
                seed=segment_seed(config.job_seed, i),
            )
        )
    return PromptScript(segments=tuple(segments), config=config, degraded=degraded)


def compile_timeline(
    lyrics: Sequence[LyricEvent],
    emotion_events: Sequence[EmotionEvent],
    beats: BeatGrid,
    duration: float,
    config: ScriptConfig,
    llm: LlmClient,
    narrative_hint: str | None = None,
) -> PromptScript:
    """Full compilation: merge, request scenes from the LLM, assemble.

    Any LLM failure degrades to template prompts rather than failing the job.
    """
    merged = merge_events(lyrics, emotion_events, beats, duration)
    request = build_prompt_request(merged, narrative_hint)
    try:
        reply = llm.complete(request.system, request.user)
        scenes = parse_prompt_response(reply, request.count)
    except LlmError as e:
        warnings.warn(f"LLM prompt generation failed ({e}); using template prompts")
        scenes = None
    return compile_script(merged, scenes, config)
