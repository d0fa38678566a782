"""Audio container and WAV loading.

The engine works on decoded mono PCM at a fixed analysis rate. Compressed
formats (MP3 etc.) are decoded by an external command declared in config;
only WAV/PCM enters here.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

ANALYSIS_SAMPLE_RATE = 22050


class AudioError(ValueError):
    """Raised for unusable audio input."""


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio: float samples in [-1, 1] plus sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise AudioError(f"sample_rate must be positive, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise AudioError(f"expected mono samples, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise AudioError("samples contain non-finite values")
        object.__setattr__(self, "samples", samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)


def _to_float(data: np.ndarray) -> np.ndarray:
    """Convert integer PCM to float in [-1, 1]; float data passes through."""
    if data.dtype == np.int16:
        return data / 32768.0
    if data.dtype == np.int32:
        return data / 2147483648.0
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if np.issubdtype(data.dtype, np.floating):
        return data.astype(np.float64)
    raise AudioError(f"unsupported WAV sample format: {data.dtype}")


def load_wav(path: str | Path, target_rate: int = ANALYSIS_SAMPLE_RATE) -> AudioBuffer:
    """Load a WAV file, downmix to mono, and resample to the analysis rate."""
    path = Path(path)
    if not path.exists():
        raise AudioError(f"audio file not found: {path}")
    rate, data = wavfile.read(str(path))
    samples = _to_float(np.asarray(data))
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if rate != target_rate:
        g = np.gcd(rate, target_rate)
        samples = resample_poly(samples, target_rate // g, rate // g)
    samples = np.clip(samples, -1.0, 1.0)
    return AudioBuffer(samples=samples, sample_rate=target_rate)


def save_wav(path: str | Path, audio: AudioBuffer) -> None:
    """Write an AudioBuffer as 16-bit PCM WAV (fixture/test helper)."""
    pcm = np.clip(audio.samples, -1.0, 1.0)
    wavfile.write(str(path), audio.sample_rate, (pcm * 32767).astype(np.int16))
