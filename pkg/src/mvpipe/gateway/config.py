"""Service configuration: one file, environment-variable overrides.

JSON schema (all keys optional):
{
  "listen_host": "127.0.0.1", "listen_port": 8000,
  "jobs_dir": "jobs", "sessions_dir": "sessions",
  "checkpoint_registry": ["base", ...],
  "default_negative_prompt": "...",
  "session_ttl_s": 3600,
  "generator": {"url": null, "timeout": 120.0, "mock": true},
  "llm":       {"url": null, "timeout": 60.0,  "mock": true},
  "embedding": {"url": null, "timeout": 30.0,  "mock": true},
  "face_verify": {"url": null, "timeout": 30.0, "mock": true},
  "charcha": {...SessionConfig fields, "thresholds": {...}}
}

Environment overrides: MVPIPE_JOBS_DIR, MVPIPE_SESSIONS_DIR,
MVPIPE_LISTEN_HOST, MVPIPE_LISTEN_PORT.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from ..charcha.actions import DetectionThresholds
from ..charcha.session import SessionConfig
from ..timeline import DEFAULT_NEGATIVE_PROMPT


@dataclass(frozen=True)
class EndpointConfig:
    url: str | None = None
    timeout: float = 60.0
    mock: bool = True

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("endpoint timeout must be positive")
        if not self.mock and not self.url:
            raise ValueError("non-mock endpoints require a url")


@dataclass(frozen=True)
class ServiceConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8000
    jobs_dir: str = "jobs"
    sessions_dir: str = "sessions"
    checkpoint_registry: tuple[str, ...] = ("base",)
    default_negative_prompt: str = DEFAULT_NEGATIVE_PROMPT
    session_ttl_s: float = 3600.0
    generator: EndpointConfig = field(default_factory=EndpointConfig)
    llm: EndpointConfig = field(default_factory=EndpointConfig)
    embedding: EndpointConfig = field(default_factory=EndpointConfig)
    face_verify: EndpointConfig = field(default_factory=EndpointConfig)
    charcha: SessionConfig = field(default_factory=SessionConfig)


def _session_config(d: dict) -> SessionConfig:
    d = dict(d)
    thresholds = DetectionThresholds(**d.pop("thresholds", {}))
    return SessionConfig(thresholds=thresholds, **d)


def load_config(path: str | Path | None = None) -> ServiceConfig:
    """Load configuration from JSON, then apply environment overrides."""
    raw: dict = {}
    if path is not None:
        raw = json.loads(Path(path).read_text())
    kwargs = {}
    endpoint_names = {"generator", "llm", "embedding", "face_verify"}
    for f in fields(ServiceConfig):
        if f.name not in raw:
            continue
        value = raw[f.name]
        if f.name in endpoint_names:
            kwargs[f.name] = EndpointConfig(**value)
        elif f.name == "charcha":
            kwargs[f.name] = _session_config(value)
        elif f.name == "checkpoint_registry":
            kwargs[f.name] = tuple(value)
        else:
            kwargs[f.name] = value
    config = ServiceConfig(**kwargs)

    env = os.environ
    overrides = {}
    if "MVPIPE_JOBS_DIR" in env:
        overrides["jobs_dir"] = env["MVPIPE_JOBS_DIR"]
    if "MVPIPE_SESSIONS_DIR" in env:
        overrides["sessions_dir"] = env["MVPIPE_SESSIONS_DIR"]
    if "MVPIPE_LISTEN_HOST" in env:
        overrides["listen_host"] = env["MVPIPE_LISTEN_HOST"]
    if "MVPIPE_LISTEN_PORT" in env:
        overrides["listen_port"] = int(env["MVPIPE_LISTEN_PORT"])
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)
    return config
