"""Render job records, persistence, and the append-only status journal.

Directory layout per job:
    jobs/<id>/job.json        submitted config + current status
    jobs/<id>/journal.ndjson  one record per state transition
    jobs/<id>/analysis.json   audio analysis bundle
    jobs/<id>/script.json     compiled PromptScript
    jobs/<id>/schedule.json   FrameSchedule
    jobs/<id>/frames/NNNNNN.png
    jobs/<id>/manifest.json
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path


class JobStatus(str, Enum):
    PENDING = "pending"
    ANALYZING = "analyzing"
    COMPILING = "compiling"
    GENERATING = "generating"
    DONE = "done"
    FAILED = "failed"


_STATUS_ORDER = [
    JobStatus.PENDING,
    JobStatus.ANALYZING,
    JobStatus.COMPILING,
    JobStatus.GENERATING,
    JobStatus.DONE,
]


class JobError(ValueError):
    """Invalid job submission or state transition."""


@dataclass(frozen=True)
class RenderJobConfig:
    audio_ref: str
    checkpoint_id: str
    transcript_path: str | None = None
    va_track_path: str | None = None
    regressor_path: str | None = None
    charcha_session: str | None = None
    lora_id: str | None = None
    lora_scale: float = 0.8
    character_token: str | None = None
    style_preset: str = "default"
    style_tags: tuple[str, ...] = ("cinematic", "highly detailed")
    negative_prompt: str | None = None
    narrative_hint: str | None = None
    fps: float = 12.0
    master_seed: int = 0
    job_id: str | None = None  # explicit id for reproducible/resumable runs

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["style_tags"] = list(self.style_tags)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RenderJobConfig":
        d = dict(d)
        if "style_tags" in d:
            d["style_tags"] = tuple(d["style_tags"])
        return cls(**d)


@dataclass(frozen=True)
class RenderJob:
    id: str
    config: RenderJobConfig
    status: JobStatus = JobStatus.PENDING
    failure_reason: str | None = None


class JobStore:
    """Filesystem-backed job persistence; single writer per job."""

    def __init__(self, root: str | Path, checkpoint_registry: tuple[str, ...] = ("base",)):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.checkpoint_registry = tuple(checkpoint_registry)

    def job_dir(self, job_id: str) -> Path:
        return self.root / job_id

    def frames_dir(self, job_id: str) -> Path:
        return self.job_dir(job_id) / "frames"

    def exists(self, job_id: str) -> bool:
        return (self.job_dir(job_id) / "job.json").exists()

    def submit(self, config: RenderJobConfig) -> RenderJob:
        if not Path(config.audio_ref).exists():
            raise JobError(f"audio file not found: {config.audio_ref}")
        if config.checkpoint_id not in self.checkpoint_registry:
            raise JobError(
                f"unknown checkpoint {config.checkpoint_id!r}; known: "
                f"{list(self.checkpoint_registry)}"
            )
        job_id = config.job_id or uuid.uuid4().hex
        if self.exists(job_id):
            raise JobError(f"job id already exists: {job_id}")
        job = RenderJob(id=job_id, config=config)
        self.job_dir(job_id).mkdir(parents=True, exist_ok=True)
        self.frames_dir(job_id).mkdir(exist_ok=True)
        self._write_job(job)
        self._journal(job_id, JobStatus.PENDING, None)
        return job

    def load(self, job_id: str) -> RenderJob:
        path = self.job_dir(job_id) / "job.json"
        if not path.exists():
            raise KeyError(f"unknown job: {job_id}")
        d = json.loads(path.read_text())
        return RenderJob(
            id=d["id"],
            config=RenderJobConfig.from_dict(d["config"]),
            status=JobStatus(d["status"]),
            failure_reason=d.get("failure_reason"),
        )

    def list_ids(self) -> list[str]:
        return sorted(
            p.name for p in self.root.iterdir() if (p / "job.json").exists()
        )

    def set_status(
        self, job: RenderJob, status: JobStatus, reason: str | None = None
    ) -> RenderJob:
        if status != JobStatus.FAILED:
            if _STATUS_ORDER.index(status) < _STATUS_ORDER.index(job.status):
                raise JobError(
                    f"status may only move forward: {job.status} -> {status}"
                )
        updated = replace(job, status=status, failure_reason=reason)
        self._write_job(updated)
        self._journal(job.id, status, reason)
        return updated

    def progress(self, job_id: str) -> tuple[JobStatus, int, int | None]:
        """(status, frames done, frames total or None before scheduling)."""
        job = self.load(job_id)
        done = len(list(self.frames_dir(job_id).glob("*.png")))
        schedule_path = self.job_dir(job_id) / "schedule.json"
        total = None
        if schedule_path.exists():
            total = len(json.loads(schedule_path.read_text())["entries"])
        return job.status, done, total

    def _write_job(self, job: RenderJob) -> None:
        payload = {
            "id": job.id,
            "config": job.config.to_dict(),
            "status": job.status.value,
            "failure_reason": job.failure_reason,
        }
        path = self.job_dir(job.id) / "job.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, indent=2))
        tmp.replace(path)

    def _journal(self, job_id: str, status: JobStatus, reason: str | None) -> None:
        record = {"ts": time.time(), "status": status.value, "reason": reason}
        with open(self.job_dir(job_id) / "journal.ndjson", "a") as f:
            f.write(json.dumps(record) + "\n")

    def journal(self, job_id: str) -> list[dict]:
        path = self.job_dir(job_id) / "journal.ndjson"
        if not path.exists():
            return []
        return [json.loads(line) for line in path.read_text().splitlines() if line]
