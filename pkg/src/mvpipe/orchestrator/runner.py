"""Render job execution: analyze, compile, generate, manifest.

Every stage persists its output before the status moves forward, so a
killed run resumes from the last persisted stage and already-written
frames are never regenerated.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..audio.bundle import AnalysisBundle, analyze_file
from ..emotion import (
    AffineVaRegressor,
    emotion_track,
    events_from_va_track,
    load_va_track,
)
from ..interp import FrameSchedule, build_frame_schedule, slerp
from ..llm import LlmClient
from ..timeline import (
    DEFAULT_NEGATIVE_PROMPT,
    PromptScript,
    ScriptConfig,
    compile_timeline,
    parse_transcript,
    segment_seed,
)
from .generator import GeneratorClient, GeneratorError, LoraRef
from .jobs import JobError, JobStatus, JobStore, RenderJob

RETRY_ATTEMPTS = 3

# Fallback affine regressor over the 8 built-in window features: loudness
# drives arousal, brightness-vs-noisiness drives valence. Used only when no
# weights file or VA track is configured.
_DEFAULT_VA_WEIGHTS = np.array(
    [
        [0.0, 0.0, 1e-4, 0.0, 0.0, 0.0, -2.0, 0.0],  # valence
        [8.0, 0.0, 0.0, 0.0, 0.01, 0.0, 0.0, 0.0],  # arousal
    ]
)


@dataclass(frozen=True)
class FrameManifest:
    job_id: str
    audio_ref: str
    fps: float
    frames: tuple[dict, ...]  # {index, time, image, segment_index, weight, sha256}
    checksum: str  # hash over the ordered frame hashes

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "audio_ref": self.audio_ref,
            "fps": self.fps,
            "frames": list(self.frames),
            "checksum": self.checksum,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FrameManifest":
        return cls(
            job_id=d["job_id"],
            audio_ref=d["audio_ref"],
            fps=d["fps"],
            frames=tuple(d["frames"]),
            checksum=d["checksum"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "FrameManifest":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _with_retry(fn, attempts: int = RETRY_ATTEMPTS, backoff: float = 0.05):
    for attempt in range(attempts):
        try:
            return fn()
        except GeneratorError:
            if attempt == attempts - 1:
                raise
            time.sleep(backoff * 2**attempt)


def _emotion_events(config, features):
    if config.va_track_path:
        return events_from_va_track(load_va_track(config.va_track_path))
    if config.regressor_path:
        regressor = AffineVaRegressor.load(config.regressor_path)
    else:
        regressor = AffineVaRegressor(weights=_DEFAULT_VA_WEIGHTS, bias=np.zeros(2))
    return emotion_track(regressor, features)


def _advance(store: JobStore, job: RenderJob, status: JobStatus) -> RenderJob:
    order = [
        JobStatus.PENDING,
        JobStatus.ANALYZING,
        JobStatus.COMPILING,
        JobStatus.GENERATING,
        JobStatus.DONE,
    ]
    if order.index(job.status) < order.index(status):
        return store.set_status(job, status)
    return job


def run_job(
    store: JobStore,
    job: RenderJob,
    generator: GeneratorClient,
    llm: LlmClient,
    retry_backoff: float = 0.05,
) -> FrameManifest:
    """Execute (or resume) a render job to completion."""
    if job.status == JobStatus.FAILED:
        raise JobError(f"job {job.id} already failed: {job.failure_reason}")
    job_dir = store.job_dir(job.id)
    cfg = job.config
    try:
        # Stage 1: audio analysis.
        job = _advance(store, job, JobStatus.ANALYZING)
        analysis_path = job_dir / "analysis.json"
        if analysis_path.exists():
            bundle = AnalysisBundle.load(analysis_path)
        else:
            bundle = analyze_file(cfg.audio_ref)
            bundle.save(analysis_path)

        # Stage 2: timeline + schedule compilation.
        job = _advance(store, job, JobStatus.COMPILING)
        script_path = job_dir / "script.json"
        schedule_path = job_dir / "schedule.json"
        if script_path.exists() and schedule_path.exists():
            script = PromptScript.load(script_path)
            schedule = FrameSchedule.load(schedule_path)
        else:
            lyrics = []
            if cfg.transcript_path:
                lyrics = parse_transcript(
                    json.loads(Path(cfg.transcript_path).read_text())
                )
            events = _emotion_events(cfg, bundle.features)
            script_config = ScriptConfig(
                style_preset=cfg.style_preset,
                style_tags=cfg.style_tags,
                character_token=cfg.character_token,
                checkpoint_id=cfg.checkpoint_id,
                lora_id=cfg.lora_id,
                lora_scale=cfg.lora_scale,
                negative_prompt=cfg.negative_prompt or DEFAULT_NEGATIVE_PROMPT,
                job_seed=cfg.master_seed,
            )
            script = compile_timeline(
                lyrics,
                events,
                bundle.beats,
                bundle.duration,
                script_config,
                llm,
                cfg.narrative_hint,
            )
            schedule = build_frame_schedule(script, cfg.fps, bundle.onset)
            script.save(script_path)
            schedule.save(schedule_path)

        # Stage 3: keyframes, interpolation, decode.
        job = _advance(store, job, JobStatus.GENERATING)
        lora = LoraRef(id=cfg.lora_id, scale=cfg.lora_scale) if cfg.lora_id else None
        keyframes = []
        for seg in script.segments:
            keyframes.append(
                _with_retry(
                    lambda seg=seg: generator.keyframe(
                        seg.prompt, seg.negative_prompt, seg.seed,
                        cfg.checkpoint_id, lora,
                    ),
                    backoff=retry_backoff,
                )
            )
        # Closing keyframe: the last prompt again under a fresh seed, so the
        # final segment keeps moving instead of freezing on its own keyframe.
        last = script.segments[-1]
        closure_seed = segment_seed(cfg.master_seed, len(script.segments))
        keyframes.append(
            _with_retry(
                lambda: generator.keyframe(
                    last.prompt, last.negative_prompt, closure_seed,
                    cfg.checkpoint_id, lora,
                ),
                backoff=retry_backoff,
            )
        )

        frames_dir = store.frames_dir(job.id)
        frame_records = []
        for entry in schedule.entries:
            index = len(frame_records)
            name = f"{index:06d}.png"
            frame_path = frames_dir / name
            if not frame_path.exists():
                k0, k1 = entry.keyframe_pair
                latent = slerp(keyframes[k0], keyframes[k1], entry.weight)
                png = _with_retry(
                    lambda latent=latent: generator.decode(latent),
                    backoff=retry_backoff,
                )
                tmp = frame_path.with_suffix(".png.tmp")
                tmp.write_bytes(png)
                tmp.replace(frame_path)
            digest = hashlib.sha256(frame_path.read_bytes()).hexdigest()
            frame_records.append(
                {
                    "index": index,
                    "time": entry.time,
                    "image": f"frames/{name}",
                    "segment_index": entry.segment_index,
                    "weight": entry.weight,
                    "sha256": digest,
                }
            )

        checksum = hashlib.sha256(
            "".join(r["sha256"] for r in frame_records).encode()
        ).hexdigest()
        manifest = FrameManifest(
            job_id=job.id,
            audio_ref=cfg.audio_ref,
            fps=cfg.fps,
            frames=tuple(frame_records),
            checksum=checksum,
        )
        manifest.save(job_dir / "manifest.json")
        store.set_status(job, JobStatus.DONE)
        return manifest
    except GeneratorError:
        store.set_status(job, JobStatus.FAILED, "generator unavailable")
        raise
