"""Command-line interface: one subcommand per pipeline stage plus serving."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from ..audio.bundle import AnalysisBundle, analyze_file
from ..charcha.trace import TraceError, replay_trace
from ..emotion import AffineVaRegressor, emotion_track
from ..interp import FrameSchedule, build_frame_schedule
from ..llm import MockLlmClient
from ..orchestrator.jobs import JobError, JobStore, RenderJobConfig
from ..orchestrator.runner import run_job
from ..timeline import PromptScript, ScriptConfig, compile_timeline, parse_transcript
from .app import build_generator, build_llm, create_app
from .config import ServiceConfig, load_config


@click.group()
def main():
    """Music-video frame pipeline and CHARCHA liveness service."""


@main.command()
@click.argument("audio", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), default=None)
def analyze(audio, output):
    """Run audio analysis and write the JSON bundle."""
    bundle = analyze_file(audio)
    out = Path(output) if output else Path(audio).with_suffix(".analysis.json")
    bundle.save(out)
    click.echo(
        f"wrote {out} ({bundle.duration:.1f}s, {len(bundle.beats)} beats, "
        f"{len(bundle.features)} feature windows)"
    )


@main.command("compile")
@click.argument("audio", type=click.Path(exists=True))
@click.argument("transcript", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), default=None)
@click.option("--seed", type=int, default=0)
@click.option("--regressor", type=click.Path(exists=True), default=None)
def compile_cmd(audio, transcript, output, seed, regressor):
    """Compile audio + transcript into a PromptScript (offline mock LLM)."""
    from ..orchestrator.runner import _DEFAULT_VA_WEIGHTS
    import numpy as np

    bundle = analyze_file(audio)
    lyrics = parse_transcript(json.loads(Path(transcript).read_text()))
    if regressor:
        va = AffineVaRegressor.load(regressor)
    else:
        va = AffineVaRegressor(weights=_DEFAULT_VA_WEIGHTS, bias=np.zeros(2))
    events = emotion_track(va, bundle.features)
    script = compile_timeline(
        lyrics, events, bundle.beats, bundle.duration,
        ScriptConfig(job_seed=seed), MockLlmClient(),
    )
    out = Path(output) if output else Path(audio).with_suffix(".script.json")
    script.save(out)
    click.echo(f"wrote {out} ({len(script.segments)} segments)")


@main.command()
@click.argument("script", type=click.Path(exists=True))
@click.argument("analysis", type=click.Path(exists=True))
@click.option("--fps", type=float, default=12.0)
@click.option("-o", "--output", type=click.Path(), default=None)
def schedule(script, analysis, fps, output):
    """Build a per-frame interpolation schedule from a script + analysis."""
    prompt_script = PromptScript.load(script)
    bundle = AnalysisBundle.load(analysis)
    frame_schedule = build_frame_schedule(prompt_script, fps, bundle.onset)
    out = Path(output) if output else Path(script).with_suffix(".schedule.json")
    frame_schedule.save(out)
    click.echo(f"wrote {out} ({len(frame_schedule.entries)} frames @ {fps} fps)")


@main.command()
@click.argument("job_config", type=click.Path(exists=True))
@click.option("--mock", is_flag=True, help="Use offline mock generator and LLM.")
@click.option("--jobs-dir", type=click.Path(), default="jobs")
@click.option("--service-config", type=click.Path(exists=True), default=None)
def render(job_config, mock, jobs_dir, service_config):
    """Submit (or resume) a render job and run it to completion."""
    config = load_config(service_config) if service_config else ServiceConfig()
    if mock:
        from dataclasses import replace
        from .config import EndpointConfig

        config = replace(
            config, generator=EndpointConfig(mock=True), llm=EndpointConfig(mock=True)
        )
    job_cfg = RenderJobConfig.from_dict(json.loads(Path(job_config).read_text()))
    if job_cfg.charcha_session is not None:
        verdict_path = (
            Path(config.sessions_dir) / job_cfg.charcha_session / "verdict.json"
        )
        passed = verdict_path.exists() and json.loads(verdict_path.read_text()).get(
            "passed"
        )
        if not passed:
            raise click.ClickException("charcha verification required")
    store = JobStore(jobs_dir, config.checkpoint_registry)
    if job_cfg.job_id and store.exists(job_cfg.job_id):
        job = store.load(job_cfg.job_id)
        click.echo(f"resuming job {job.id} from status {job.status.value}")
    else:
        try:
            job = store.submit(job_cfg)
        except JobError as e:
            raise click.ClickException(str(e))
    manifest = run_job(store, job, build_generator(config), build_llm(config))
    click.echo(
        f"job {job.id} done: {len(manifest.frames)} frames, "
        f"manifest {store.job_dir(job.id) / 'manifest.json'}"
    )


@main.command("charcha-serve")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
def charcha_serve(config_path, host, port):
    """Serve the HTTP/WebSocket gateway."""
    import uvicorn

    config = load_config(config_path)
    uvicorn.run(
        create_app(config),
        host=host or config.listen_host,
        port=port or config.listen_port,
        log_level="warning",
    )


@main.command("charcha-replay")
@click.argument("trace", type=click.Path(exists=True))
@click.option("--seed", type=int, default=None)
def charcha_replay(trace, seed):
    """Replay a landmark trace and print the verdict and scores."""
    try:
        report, _ = replay_trace(trace, rng_seed=seed)
    except TraceError as e:
        raise click.ClickException(str(e))
    click.echo("Passed" if report["passed"] else f"Failed ({report['failure_reason']})")
    for score in report["scores"]:
        click.echo(f"  {score['action']}: {score['score']}/10")
    if report["spoof_flags"]:
        click.echo(f"  spoof flags: {', '.join(report['spoof_flags'])}")


@main.command("eval")
@click.argument("job_id")
@click.argument("refs", nargs=-1, type=click.Path(exists=True))
@click.option("--jobs-dir", type=click.Path(), default="jobs")
def eval_cmd(job_id, refs, jobs_dir):
    """Evaluate a finished job against reference images (mock clients)."""
    from ..evalsuite import (
        FrameVerification,
        MockEmbeddingClient,
        MockFaceVerifyClient,
        face_frame_metrics,
        similarity_track,
    )
    from ..orchestrator.runner import FrameManifest

    store = JobStore(jobs_dir)
    manifest_path = store.job_dir(job_id) / "manifest.json"
    if not manifest_path.exists():
        raise click.ClickException(f"no manifest for job {job_id}")
    manifest = FrameManifest.load(manifest_path)
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
    result = {"face_metrics": face_frame_metrics(verifications).to_dict()}
    if refs:
        references = [Path(r).read_bytes() for r in refs]
        track = similarity_track(frame_bytes, references, MockEmbeddingClient())
        result["similarity_track"] = track.to_dict()
    (job_dir / "eval.json").write_text(json.dumps(result, indent=2))
    click.echo(json.dumps(result["face_metrics"], indent=2))


if __name__ == "__main__":
    sys.exit(main())
