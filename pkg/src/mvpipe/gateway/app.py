"""HTTP + WebSocket service: render jobs, CHARCHA sessions, evaluation."""

from __future__ import annotations

import json
import shutil
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query, Request, WebSocket
from fastapi.responses import FileResponse, JSONResponse
from starlette.websockets import WebSocketDisconnect

from ..charcha.landmarks import LandmarkFrame
from ..charcha.session import CharchaSession, SessionConfig
from ..evalsuite import (
    FrameVerification,
    MockEmbeddingClient,
    MockFaceVerifyClient,
    face_frame_metrics,
    similarity_track,
    summarize_tracks,
)
from ..llm import HttpLlmClient, MockLlmClient
from ..orchestrator.generator import HttpGeneratorClient, MockGenerator
from ..orchestrator.jobs import JobError, JobStatus, JobStore, RenderJobConfig
from ..orchestrator.runner import FrameManifest, run_job
from .config import ServiceConfig


def build_generator(config: ServiceConfig):
    if config.generator.mock:
        return MockGenerator()
    return HttpGeneratorClient(url=config.generator.url, timeout=config.generator.timeout)


def build_llm(config: ServiceConfig):
    if config.llm.mock:
        return MockLlmClient()
    return HttpLlmClient(url=config.llm.url, timeout=config.llm.timeout)


class SessionRegistry:
    """Live CHARCHA sessions plus on-disk verdicts and snapshots.

    Layout: sessions/<id>/{verdict.json, snapshots/, pending/}. Pending
    snapshot uploads are promoted on a Passed verdict and deleted on
    failure: no images of unverified people are retained.
    """

    def __init__(self, root: str | Path, config: SessionConfig, ttl_s: float):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.ttl_s = ttl_s
        self.live: dict[str, CharchaSession] = {}
        self.expiry: dict[str, float] = {}
        self.lock = threading.Lock()

    def create(self, rng_seed: int | None = None) -> dict:
        session_id = uuid.uuid4().hex
        seed = rng_seed if rng_seed is not None else int.from_bytes(
            uuid.uuid4().bytes[:4], "big"
        )
        with self.lock:
            self.live[session_id] = CharchaSession(session_id, seed, self.config)
            self.expiry[session_id] = time.time() + self.ttl_s
        (self.root / session_id / "pending").mkdir(parents=True, exist_ok=True)
        return {"id": session_id, "expires_in_s": self.ttl_s}

    def get(self, session_id: str) -> CharchaSession | None:
        return self.live.get(session_id)

    def known(self, session_id: str) -> bool:
        return session_id in self.live or (
            self.root / session_id / "verdict.json"
        ).exists()

    def expired(self, session_id: str) -> bool:
        deadline = self.expiry.get(session_id)
        return deadline is not None and time.time() > deadline

    def verdict(self, session_id: str) -> dict | None:
        """Terminal report, from memory or disk; None while in progress."""
        session = self.live.get(session_id)
        if session is not None and session.terminal:
            return session.report()
        path = self.root / session_id / "verdict.json"
        if path.exists():
            return json.loads(path.read_text())
        return None

    def is_passed(self, session_id: str) -> bool:
        v = self.verdict(session_id)
        return bool(v and v.get("passed"))

    def save_snapshot(self, session_id: str, tag: str, data: bytes) -> Path:
        directory = "snapshots" if self.is_passed(session_id) else "pending"
        target = self.root / session_id / directory
        target.mkdir(parents=True, exist_ok=True)
        path = target / f"{tag}.png"
        path.write_bytes(data)
        return path

    def finalize(self, session: CharchaSession) -> None:
        """Persist the verdict and apply the snapshot retention policy."""
        report = session.report()
        session_dir = self.root / session.id
        session_dir.mkdir(parents=True, exist_ok=True)
        (session_dir / "verdict.json").write_text(json.dumps(report, indent=2))
        pending = session_dir / "pending"
        if pending.exists():
            if report["passed"]:
                target = session_dir / "snapshots"
                target.mkdir(exist_ok=True)
                for f in pending.iterdir():
                    shutil.move(str(f), target / f.name)
            shutil.rmtree(pending, ignore_errors=True)

    def drain(self) -> None:
        """Fail every active session (server shutdown)."""
        with self.lock:
            for session in self.live.values():
                if not session.terminal:
                    session.abort("server shutdown")
                    self.finalize(session)


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    store = JobStore(config.jobs_dir, config.checkpoint_registry)
    registry = SessionRegistry(config.sessions_dir, config.charcha, config.session_ttl_s)
    generator = build_generator(config)
    llm = build_llm(config)
    executor = ThreadPoolExecutor(max_workers=4)

    @asynccontextmanager
    async def _lifespan(app: FastAPI):
        yield
        registry.drain()
        executor.shutdown(wait=False)

    app = FastAPI(title="mvpipe gateway", lifespan=_lifespan)
    app.state.store = store
    app.state.registry = registry
    app.state.config = config

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    # -- render jobs --------------------------------------------------------

    @app.post("/jobs", status_code=201)
    def create_job(body: dict = Body(...)):
        session_id = body.get("charcha_session")
        if session_id is not None and not registry.is_passed(session_id):
            raise HTTPException(403, "charcha verification required")
        try:
            job_config = RenderJobConfig.from_dict(body)
        except TypeError as e:
            raise HTTPException(400, f"invalid job config: {e}")
        try:
            job = store.submit(job_config)
        except JobError as e:
            raise HTTPException(400, str(e))
        executor.submit(_run, job.id)
        return {"id": job.id, "status": job.status.value}

    def _run(job_id: str):
        job = store.load(job_id)
        try:
            run_job(store, job, generator, llm)
        except Exception:
            job = store.load(job_id)
            if job.status != JobStatus.FAILED:
                store.set_status(job, JobStatus.FAILED, "internal error")

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        try:
            status, done, total = store.progress(job_id)
        except KeyError:
            raise HTTPException(404, "unknown job")
        job = store.load(job_id)
        return {
            "id": job_id,
            "status": status.value,
            "failure_reason": job.failure_reason,
            "frames_done": done,
            "frames_total": total,
        }

    @app.get("/jobs/{job_id}/manifest")
    def get_manifest(job_id: str):
        path = store.job_dir(job_id) / "manifest.json"
        if not store.exists(job_id):
            raise HTTPException(404, "unknown job")
        if not path.exists():
            raise HTTPException(404, "manifest not ready")
        return JSONResponse(json.loads(path.read_text()))

    @app.get("/jobs/{job_id}/frames/{index}")
    def get_frame(job_id: str, index: int):
        path = store.frames_dir(job_id) / f"{index:06d}.png"
        if not path.exists():
            raise HTTPException(404, "frame not found")
        return FileResponse(path, media_type="image/png")

    @app.post("/jobs/{job_id}/eval")
    def eval_job(job_id: str, body: dict = Body(default={})):
        manifest_path = store.job_dir(job_id) / "manifest.json"
        if not store.exists(job_id):
            raise HTTPException(404, "unknown job")
        if not manifest_path.exists():
            raise HTTPException(409, "job has no manifest yet")
        manifest = FrameManifest.load(manifest_path)
        reference_paths = [Path(p) for p in body.get("references", [])]
        missing = [str(p) for p in reference_paths if not p.exists()]
        if missing:
            raise HTTPException(400, f"missing reference images: {missing}")
        references = [p.read_bytes() for p in reference_paths]

        job_dir = store.job_dir(job_id)
        verify = MockFaceVerifyClient()
        verifications = []
        frame_bytes = []
        step = max(1, round(manifest.fps))
        for record in manifest.frames:
            data = (job_dir / record["image"]).read_bytes()
            face, verified = verify.verify(data)
            verifications.append(
                FrameVerification(
                    frame_index=record["index"], face_present=face, verified=verified
                )
            )
            if record["index"] % step == 0:
                frame_bytes.append(data)
        report = face_frame_metrics(verifications).to_dict()
        result = {"face_metrics": report}
        if references:
            track = similarity_track(frame_bytes, references, MockEmbeddingClient())
            result["similarity_track"] = track.to_dict()
            result["summary"] = {
                "flags": list(summarize_tracks([track]).flags),
            }
        (job_dir / "eval.json").write_text(json.dumps(result, indent=2))
        return result

    # -- CHARCHA sessions ----------------------------------------------------

    @app.post("/charcha/sessions", status_code=201)
    def create_session(body: dict = Body(default={})):
        return registry.create(body.get("rng_seed"))

    @app.get("/charcha/sessions/{session_id}/verdict")
    def get_verdict(session_id: str):
        if not registry.known(session_id):
            raise HTTPException(404, "unknown session")
        verdict = registry.verdict(session_id)
        if verdict is None:
            return {"status": "in_progress"}
        return verdict

    @app.post("/charcha/sessions/{session_id}/snapshot", status_code=202)
    async def upload_snapshot(session_id: str, request: Request, tag: str = Query(...)):
        if not registry.known(session_id):
            raise HTTPException(404, "unknown session")
        if registry.expired(session_id):
            raise HTTPException(403, "session token expired")
        verdict = registry.verdict(session_id)
        if verdict is not None and not verdict["passed"]:
            raise HTTPException(410, "session failed; snapshots not accepted")
        data = await request.body()
        if not data:
            raise HTTPException(400, "empty snapshot body")
        registry.save_snapshot(session_id, tag, data)
        return {"stored": tag}

    @app.websocket("/charcha/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        session = registry.get(session_id)
        if session is None:
            await ws.close(code=4404)
            return
        if registry.expired(session_id):
            await ws.close(code=4403)
            return
        await ws.accept()
        try:
            while not session.terminal:
                msg = await ws.receive_json()
                kind = msg.get("type")
                if kind == "frame":
                    events = session.process_frame(LandmarkFrame.from_message(msg))
                elif kind == "tick":
                    events = session.tick(int(msg["t_ms"]))
                elif kind == "end":
                    events = session.finish()
                else:
                    await ws.send_json(
                        {"type": "error", "message": f"unknown message type {kind!r}"}
                    )
                    continue
                for event in events:
                    await ws.send_json(event)
            registry.finalize(session)
            await ws.close()
        except WebSocketDisconnect:
            if not session.terminal:
                session.finish()
            registry.finalize(session)

    return app
