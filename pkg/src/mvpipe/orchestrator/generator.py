"""Text-to-image generation boundary: client protocol, mock, HTTP client.

The engine never runs diffusion itself; it asks a generator service for
one keyframe latent per prompt and for decodes of interpolated latents.
Keyframes must be deterministic in (prompt, seed, checkpoint, lora): the
mock guarantees it, real services are asked to honor it.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from PIL import Image

import httpx

DEFAULT_LATENT_DIM = 256


class GeneratorError(RuntimeError):
    """The generation service is unreachable or misbehaving."""


@dataclass(frozen=True)
class LoraRef:
    id: str
    scale: float = 0.8

    def __post_init__(self):
        if not (0 < self.scale <= 1):
            raise ValueError("lora scale must lie in (0, 1]")


class GeneratorClient(Protocol):
    def keyframe(
        self,
        prompt: str,
        negative_prompt: str,
        seed: int,
        checkpoint_id: str,
        lora: LoraRef | None,
    ) -> np.ndarray: ...

    def decode(self, latent: np.ndarray) -> bytes: ...


@dataclass(frozen=True)
class MockGenerator:
    """Offline deterministic generator for tests and --mock runs.

    Keyframes are seeded pseudo-random unit vectors from a stable hash of
    all conditioning inputs; decode renders a small solid-color image with
    the latent hash embedded as a pixel strip.
    """

    latent_dim: int = DEFAULT_LATENT_DIM
    image_size: int = 64

    def keyframe(
        self,
        prompt: str,
        negative_prompt: str,
        seed: int,
        checkpoint_id: str,
        lora: LoraRef | None,
    ) -> np.ndarray:
        lora_key = f"{lora.id}@{lora.scale}" if lora else "none"
        key = f"{prompt}\x1f{negative_prompt}\x1f{seed}\x1f{checkpoint_id}\x1f{lora_key}"
        digest = hashlib.sha256(key.encode()).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
        v = rng.standard_normal(self.latent_dim)
        return v / np.linalg.norm(v)

    def decode(self, latent: np.ndarray) -> bytes:
        digest = hashlib.sha256(np.asarray(latent, dtype=np.float64).tobytes()).digest()
        color = tuple(digest[:3])
        img = Image.new("RGB", (self.image_size, self.image_size), color)
        px = img.load()
        for i, byte in enumerate(digest):
            px[i % self.image_size, i // self.image_size] = (byte, byte, byte)
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        return buf.getvalue()


@dataclass(frozen=True)
class HttpGeneratorClient:
    """Client for a text-to-image server exposing latents.

    POST {url}/keyframe with the full conditioning payload; the response
    must carry {"latent": [floats]}. POST {url}/decode with {"latent": [...]}
    returning PNG bytes. Services without latent support should put the
    prompt embedding in "latent" instead (interpolation then happens in
    embedding space; the schedule itself is space-agnostic).
    """

    url: str
    timeout: float = 120.0
    steps: int = 30

    def keyframe(
        self,
        prompt: str,
        negative_prompt: str,
        seed: int,
        checkpoint_id: str,
        lora: LoraRef | None,
    ) -> np.ndarray:
        payload = {
            "prompt": prompt,
            "negative_prompt": negative_prompt,
            "seed": seed,
            "steps": self.steps,
            "checkpoint": checkpoint_id,
            "lora": [{"name": lora.id, "weight": lora.scale}] if lora else [],
        }
        try:
            resp = httpx.post(f"{self.url}/keyframe", json=payload, timeout=self.timeout)
            resp.raise_for_status()
            return np.array(resp.json()["latent"], dtype=np.float64)
        except (httpx.HTTPError, KeyError, ValueError) as e:
            raise GeneratorError(f"keyframe request failed: {e}") from e

    def decode(self, latent: np.ndarray) -> bytes:
        try:
            resp = httpx.post(
                f"{self.url}/decode",
                json={"latent": np.asarray(latent).tolist()},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            return resp.content
        except httpx.HTTPError as e:
            raise GeneratorError(f"decode request failed: {e}") from e
