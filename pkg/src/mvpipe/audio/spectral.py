"""Spectrogram, log-mel onset strength, and per-window summary features.

Fixed analysis parameters: STFT window 2048, hop 512, 128 mel bands,
log(1 + S) compression. Frames are centered (reflect padding), so frame t
covers samples around t * hop.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .buffer import AudioBuffer, AudioError

WINDOW_SAMPLES = 2048
HOP_SAMPLES = 512
MEL_BANDS = 128
DEFAULT_FEATURE_WINDOW = 5.0

FEATURE_NAMES = (
    "rms_mean",
    "rms_std",
    "centroid_mean",
    "centroid_std",
    "flux_mean",
    "flux_std",
    "zcr_mean",
    "rolloff_mean",
)


@dataclass(frozen=True)
class Spectrogram:
    """Magnitude spectrogram, frames x bins."""

    magnitudes: np.ndarray  # shape (frames, bins)
    sample_rate: int
    hop_samples: int
    window_samples: int

    @property
    def frame_rate(self) -> float:
        return self.sample_rate / self.hop_samples

    @property
    def n_frames(self) -> int:
        return self.magnitudes.shape[0]


@dataclass(frozen=True)
class OnsetEnvelope:
    """Non-negative spectral-flux envelope, one value per analysis frame."""

    values: np.ndarray
    frame_rate: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("onset envelope must be finite and non-negative")
        object.__setattr__(self, "values", values)

    @property
    def hop(self) -> float:
        return 1.0 / self.frame_rate


@dataclass(frozen=True)
class WindowFeatures:
    """Summary statistics over one analysis window (see FEATURE_NAMES)."""

    window_start: float
    window_length: float
    vector: np.ndarray

    def __post_init__(self):
        vector = np.asarray(self.vector, dtype=np.float64)
        if vector.shape != (len(FEATURE_NAMES),):
            raise ValueError(f"feature vector must have {len(FEATURE_NAMES)} entries")
        if not np.all(np.isfinite(vector)):
            raise ValueError("feature vector contains non-finite values")
        object.__setattr__(self, "vector", vector)


def compute_spectrogram(
    audio: AudioBuffer,
    window_samples: int = WINDOW_SAMPLES,
    hop_samples: int = HOP_SAMPLES,
) -> Spectrogram:
    """Centered magnitude STFT with reflect padding and a Hann window.

    Frame count is floor(len(audio) / hop) + 1: the signal is reflect-padded
    by window//2 on each side, so the generic floor((n - window)/hop) + 1
    applies to the padded length.
    """
    if window_samples < hop_samples or hop_samples <= 0:
        raise ValueError("require window_samples >= hop_samples > 0")
    if len(audio) == 0:
        raise AudioError("audio is empty")
    if len(audio) < window_samples:
        raise AudioError(
            f"audio too short: {len(audio)} samples < one window ({window_samples})"
        )
    pad = window_samples // 2
    x = np.pad(audio.samples, pad, mode="reflect")
    n_frames = (len(x) - window_samples) // hop_samples + 1
    window = np.hanning(window_samples)
    frames = np.lib.stride_tricks.sliding_window_view(x, window_samples)[::hop_samples]
    frames = frames[:n_frames] * window
    mags = np.abs(np.fft.rfft(frames, axis=1))
    return Spectrogram(
        magnitudes=mags,
        sample_rate=audio.sample_rate,
        hop_samples=hop_samples,
        window_samples=window_samples,
    )


def mel_filterbank(n_bands: int, n_fft_bins: int, sample_rate: int) -> np.ndarray:
    """Triangular mel filterbank, shape (n_bands, n_fft_bins)."""

    def hz_to_mel(f):
        return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)

    def mel_to_hz(m):
        return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)

    nyquist = sample_rate / 2.0
    mel_points = np.linspace(hz_to_mel(0.0), hz_to_mel(nyquist), n_bands + 2)
    hz_points = mel_to_hz(mel_points)
    fft_freqs = np.linspace(0.0, nyquist, n_fft_bins)
    fb = np.zeros((n_bands, n_fft_bins))
    for b in range(n_bands):
        lo, mid, hi = hz_points[b], hz_points[b + 1], hz_points[b + 2]
        rising = (fft_freqs - lo) / max(mid - lo, 1e-12)
        falling = (hi - fft_freqs) / max(hi - mid, 1e-12)
        fb[b] = np.clip(np.minimum(rising, falling), 0.0, None)
    return fb


def onset_strength(spec: Spectrogram, mel_bands: int = MEL_BANDS) -> OnsetEnvelope:
    """Positive log-mel spectral flux summed over bands; first frame is 0."""
    if spec.n_frames == 0:
        raise ValueError("spectrogram has no frames")
    fb = mel_filterbank(mel_bands, spec.magnitudes.shape[1], spec.sample_rate)
    logmel = np.log1p(spec.magnitudes @ fb.T)  # frames x bands
    flux = np.diff(logmel, axis=0)
    env = np.maximum(flux, 0.0).sum(axis=1)
    values = np.concatenate([[0.0], env])
    return OnsetEnvelope(values=values, frame_rate=spec.frame_rate)


def _frame_signal(x: np.ndarray, window: int, hop: int) -> np.ndarray:
    if len(x) < window:
        return np.empty((0, window))
    return np.lib.stride_tricks.sliding_window_view(x, window)[::hop]


def window_features(
    audio: AudioBuffer, window: float = DEFAULT_FEATURE_WINDOW
) -> list[WindowFeatures]:
    """Per-window summary features (fallback for an external extractor).

    One WindowFeatures per full window; a trailing partial window is
    dropped. Audio shorter than one window yields an empty list.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    win_samples = int(round(window * audio.sample_rate))
    n_windows = len(audio) // win_samples
    if n_windows == 0:
        warnings.warn(
            f"audio shorter than one {window:g} s window; no features extracted"
        )
        return []
    out = []
    for w in range(n_windows):
        chunk = audio.samples[w * win_samples : (w + 1) * win_samples]
        out.append(
            WindowFeatures(
                window_start=w * window,
                window_length=window,
                vector=_feature_vector(chunk, audio.sample_rate),
            )
        )
    return out


def _feature_vector(chunk: np.ndarray, sample_rate: int) -> np.ndarray:
    frames = _frame_signal(chunk, WINDOW_SAMPLES, HOP_SAMPLES)
    if frames.shape[0] == 0:
        frames = chunk[None, :]
    hann = np.hanning(frames.shape[1])
    mags = np.abs(np.fft.rfft(frames * hann, axis=1))
    freqs = np.linspace(0.0, sample_rate / 2.0, mags.shape[1])

    rms = np.sqrt((frames**2).mean(axis=1))
    total = mags.sum(axis=1)
    safe = np.where(total > 0, total, 1.0)
    centroid = np.where(total > 0, (mags * freqs).sum(axis=1) / safe, 0.0)
    flux = np.zeros(mags.shape[0])
    if mags.shape[0] > 1:
        flux[1:] = np.maximum(np.diff(mags, axis=0), 0.0).sum(axis=1)
    zcr = np.abs(np.diff(np.signbit(frames), axis=1)).mean(axis=1)
    # rolloff: lowest frequency below which 85% of spectral energy lies
    cum = np.cumsum(mags, axis=1)
    idx = np.argmax(cum >= 0.85 * total[:, None], axis=1)
    rolloff = np.where(total > 0, freqs[idx], 0.0)

    return np.array(
        [
            rms.mean(),
            rms.std(),
            centroid.mean(),
            centroid.std(),
            flux.mean(),
            flux.std(),
            zcr.mean(),
            rolloff.mean(),
        ]
    )
