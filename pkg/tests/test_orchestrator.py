import json

import numpy as np
import pytest

from helpers import click_track
from mvpipe.audio import save_wav
from mvpipe.llm import MockLlmClient
from mvpipe.orchestrator import (
    FrameManifest,
    GeneratorError,
    JobError,
    JobStatus,
    JobStore,
    MockGenerator,
    RenderJobConfig,
    run_job,
)


@pytest.fixture
def audio_path(tmp_path):
    path = tmp_path / "track.wav"
    save_wav(path, click_track(120, 12))
    return str(path)


@pytest.fixture
def store(tmp_path):
    return JobStore(tmp_path / "jobs")


def _config(audio_path, **kw):
    return RenderJobConfig(audio_ref=audio_path, checkpoint_id="base", **kw)


class FlakyGenerator(MockGenerator):
    """Fails the first N calls, then behaves like the mock."""

    def __init__(self, failures):
        self.remaining = failures

    def keyframe(self, *args, **kwargs):
        if self.remaining > 0:
            self.remaining -= 1
            raise GeneratorError("transient")
        return super().keyframe(*args, **kwargs)


class BrokenGenerator(MockGenerator):
    def keyframe(self, *args, **kwargs):
        raise GeneratorError("down")


class TestJobStore:
    def test_submit_and_load(self, store, audio_path):
        job = store.submit(_config(audio_path))
        assert job.status is JobStatus.PENDING
        assert store.load(job.id).config == job.config

    def test_distinct_ids(self, store, audio_path):
        ids = {store.submit(_config(audio_path)).id for _ in range(5)}
        assert len(ids) == 5

    def test_missing_audio_rejected(self, store):
        with pytest.raises(JobError, match="audio"):
            store.submit(_config("/nonexistent/file.wav"))

    def test_unknown_checkpoint_rejected(self, store, audio_path):
        with pytest.raises(JobError, match="checkpoint"):
            store.submit(RenderJobConfig(audio_ref=audio_path, checkpoint_id="nope"))

    def test_explicit_job_id(self, store, audio_path):
        job = store.submit(_config(audio_path, job_id="fixed"))
        assert job.id == "fixed"
        with pytest.raises(JobError, match="exists"):
            store.submit(_config(audio_path, job_id="fixed"))

    def test_status_regression_rejected(self, store, audio_path):
        job = store.submit(_config(audio_path))
        job = store.set_status(job, JobStatus.COMPILING)
        with pytest.raises(JobError):
            store.set_status(job, JobStatus.ANALYZING)

    def test_failed_allowed_from_any_state(self, store, audio_path):
        job = store.submit(_config(audio_path))
        job = store.set_status(job, JobStatus.GENERATING)
        job = store.set_status(job, JobStatus.FAILED, "boom")
        assert job.failure_reason == "boom"

    def test_journal_records_transitions(self, store, audio_path):
        job = store.submit(_config(audio_path))
        store.set_status(job, JobStatus.ANALYZING)
        statuses = [r["status"] for r in store.journal(job.id)]
        assert statuses == ["pending", "analyzing"]


class TestRunJob:
    def test_full_run(self, store, audio_path):
        job = store.submit(_config(audio_path, master_seed=7))
        manifest = run_job(store, job, MockGenerator(), MockLlmClient())
        assert store.load(job.id).status is JobStatus.DONE
        assert len(manifest.frames) == round(12 * 12.0)
        frames_dir = store.frames_dir(job.id)
        for record in manifest.frames:
            path = store.job_dir(job.id) / record["image"]
            assert path.exists()
            assert path.parent == frames_dir

    def test_manifest_checksum_matches_files(self, store, audio_path):
        import hashlib

        job = store.submit(_config(audio_path))
        manifest = run_job(store, job, MockGenerator(), MockLlmClient())
        digests = []
        for record in manifest.frames:
            data = (store.job_dir(job.id) / record["image"]).read_bytes()
            digest = hashlib.sha256(data).hexdigest()
            assert digest == record["sha256"]
            digests.append(digest)
        assert manifest.checksum == hashlib.sha256("".join(digests).encode()).hexdigest()

    def test_same_seed_same_manifest(self, store, audio_path):
        j1 = store.submit(_config(audio_path, master_seed=3, job_id="a"))
        j2 = store.submit(_config(audio_path, master_seed=3, job_id="b"))
        m1 = run_job(store, j1, MockGenerator(), MockLlmClient())
        m2 = run_job(store, j2, MockGenerator(), MockLlmClient())
        assert m1.checksum == m2.checksum
        assert [f["sha256"] for f in m1.frames] == [f["sha256"] for f in m2.frames]

    def test_different_seed_different_frames(self, store, audio_path):
        j1 = store.submit(_config(audio_path, master_seed=1))
        j2 = store.submit(_config(audio_path, master_seed=2))
        m1 = run_job(store, j1, MockGenerator(), MockLlmClient())
        m2 = run_job(store, j2, MockGenerator(), MockLlmClient())
        assert m1.checksum != m2.checksum

    def test_transcript_and_lyrics_flow_into_prompts(self, store, audio_path, tmp_path):
        transcript = tmp_path / "t.json"
        transcript.write_text(
            json.dumps({"segments": [{"start": 2.0, "end": 6.0, "text": "neon rain"}]})
        )
        job = store.submit(_config(audio_path, transcript_path=str(transcript)))
        run_job(store, job, MockGenerator(), MockLlmClient())
        from mvpipe.timeline import PromptScript

        script = PromptScript.load(store.job_dir(job.id) / "script.json")
        assert any("neon rain" in s.prompt for s in script.segments)

    def test_retry_recovers_from_transient_failures(self, store, audio_path):
        job = store.submit(_config(audio_path))
        manifest = run_job(
            store, job, FlakyGenerator(failures=2), MockLlmClient(), retry_backoff=0.0
        )
        assert store.load(job.id).status is JobStatus.DONE
        assert len(manifest.frames) > 0

    def test_persistent_failure_marks_failed(self, store, audio_path):
        job = store.submit(_config(audio_path))
        with pytest.raises(GeneratorError):
            run_job(store, job, BrokenGenerator(), MockLlmClient(), retry_backoff=0.0)
        reloaded = store.load(job.id)
        assert reloaded.status is JobStatus.FAILED
        assert reloaded.failure_reason == "generator unavailable"

    def test_failed_job_cannot_rerun(self, store, audio_path):
        job = store.submit(_config(audio_path))
        with pytest.raises(GeneratorError):
            run_job(store, job, BrokenGenerator(), MockLlmClient(), retry_backoff=0.0)
        with pytest.raises(JobError, match="failed"):
            run_job(store, store.load(job.id), MockGenerator(), MockLlmClient())

    def test_resume_skips_existing_frames_and_matches(self, store, audio_path):
        j1 = store.submit(_config(audio_path, master_seed=5, job_id="full"))
        full = run_job(store, j1, MockGenerator(), MockLlmClient())

        j2 = store.submit(_config(audio_path, master_seed=5, job_id="partial"))
        interrupted = FlakyGenerator(failures=0)
        run_job(store, j2, interrupted, MockLlmClient())
        # simulate a crash: delete the manifest and half the frames
        job_dir = store.job_dir("partial")
        (job_dir / "manifest.json").unlink()
        frames = sorted(store.frames_dir("partial").glob("*.png"))
        kept = frames[: len(frames) // 2]
        for f in frames[len(frames) // 2 :]:
            f.unlink()
        before = {f.name: f.read_bytes() for f in kept}

        resumed = run_job(store, store.load("partial"), MockGenerator(), MockLlmClient())
        assert resumed.checksum == full.checksum
        # surviving frames were reused byte for byte
        for name, data in before.items():
            assert (store.frames_dir("partial") / name).read_bytes() == data

    def test_progress_reporting(self, store, audio_path):
        job = store.submit(_config(audio_path))
        run_job(store, job, MockGenerator(), MockLlmClient())
        status, done, total = store.progress(job.id)
        assert status is JobStatus.DONE
        assert done == total == round(12 * 12.0)

    def test_manifest_roundtrip(self, store, audio_path):
        job = store.submit(_config(audio_path))
        manifest = run_job(store, job, MockGenerator(), MockLlmClient())
        loaded = FrameManifest.load(store.job_dir(job.id) / "manifest.json")
        assert loaded == manifest


class TestMockGenerator:
    def test_unit_norm_latents(self):
        gen = MockGenerator()
        v = gen.keyframe("a", "b", 1, "base", None)
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12

    def test_conditioning_sensitivity(self):
        gen = MockGenerator()
        base = gen.keyframe("a", "b", 1, "base", None)
        assert not np.array_equal(base, gen.keyframe("c", "b", 1, "base", None))
        assert not np.array_equal(base, gen.keyframe("a", "b", 2, "base", None))
        assert np.array_equal(base, gen.keyframe("a", "b", 1, "base", None))

    def test_decode_is_valid_png(self):
        import io

        from PIL import Image

        gen = MockGenerator()
        png = gen.decode(gen.keyframe("a", "b", 1, "base", None))
        img = Image.open(io.BytesIO(png))
        assert img.size == (64, 64)
        assert img.format == "PNG"
