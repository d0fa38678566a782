#!/usr/bin/env python3
"""End-to-end mock render: fixture audio + transcript -> frames + manifest.

Everything runs offline against the deterministic mock generator and LLM,
so two runs with the same master seed produce byte-identical manifests.
"""

import argparse
import json
import time
from pathlib import Path

from mvpipe.llm import MockLlmClient
from mvpipe.orchestrator import JobStore, MockGenerator, RenderJobConfig, run_job


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("audio", type=Path)
    parser.add_argument("--transcript", type=Path, default=None)
    parser.add_argument("--jobs-dir", type=Path, default=Path("jobs"))
    parser.add_argument("--fps", type=float, default=12.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--job-id", default=None)
    args = parser.parse_args()

    config = RenderJobConfig(
        audio_ref=str(args.audio),
        checkpoint_id="base",
        transcript_path=str(args.transcript) if args.transcript else None,
        fps=args.fps,
        master_seed=args.seed,
        job_id=args.job_id,
    )
    store = JobStore(args.jobs_dir)
    if config.job_id and store.exists(config.job_id):
        job = store.load(config.job_id)
        print(f"resuming job {job.id} ({job.status.value})")
    else:
        job = store.submit(config)
    start = time.monotonic()
    manifest = run_job(store, job, MockGenerator(), MockLlmClient())
    elapsed = time.monotonic() - start
    print(
        json.dumps(
            {
                "job_id": job.id,
                "frames": len(manifest.frames),
                "checksum": manifest.checksum,
                "seconds": round(elapsed, 2),
            },
            indent=2,
        )
    )


if __name__ == "__main__":
    main()
