from .generator import (
    GeneratorClient,
    GeneratorError,
    HttpGeneratorClient,
    LoraRef,
    MockGenerator,
)
from .jobs import JobError, JobStatus, JobStore, RenderJob, RenderJobConfig
from .runner import FrameManifest, run_job

__all__ = [
    "GeneratorClient",
    "GeneratorError",
    "HttpGeneratorClient",
    "LoraRef",
    "MockGenerator",
    "JobError",
    "JobStatus",
    "JobStore",
    "RenderJob",
    "RenderJobConfig",
    "FrameManifest",
    "run_job",
]
