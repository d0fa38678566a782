"""Predominant local pulse and beat extraction.

A Fourier tempogram is computed over the windowed onset envelope; per
window the strongest tempo bin inside the allowed range is picked and an
optimal-phase sinusoidal kernel is synthesized and overlap-added. The
half-wave-rectified, max-normalized accumulation is the pulse curve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import OnsetEnvelope

TEMPOGRAM_WINDOW = 384  # onset frames (~8.9 s at 22050/512)
SMOOTHING_FRAMES = 5
DEFAULT_TEMPO_MIN = 30.0
DEFAULT_TEMPO_MAX = 300.0
DEFAULT_BEAT_THRESHOLD = 0.1


@dataclass(frozen=True)
class PulseCurve:
    """Beat-salience curve in [0, 1], one value per onset frame."""

    values: np.ndarray
    frame_rate: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if np.any(values < 0) or np.any(values > 1.0 + 1e-12):
            raise ValueError("pulse curve values must lie in [0, 1]")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class BeatGrid:
    """Strictly ascending beat times in seconds."""

    beat_times: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.beat_times, dtype=np.float64)
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("beat times must be strictly ascending")
        object.__setattr__(self, "beat_times", times)

    def __len__(self) -> int:
        return len(self.beat_times)


def predominant_local_pulse(
    onset: OnsetEnvelope,
    tempo_min: float = DEFAULT_TEMPO_MIN,
    tempo_max: float = DEFAULT_TEMPO_MAX,
    tempogram_window: int = TEMPOGRAM_WINDOW,
) -> PulseCurve:
    """Pulse curve from the onset envelope via a sinusoidal-kernel tempogram."""
    if not (0 < tempo_min < tempo_max):
        raise ValueError("require 0 < tempo_min < tempo_max")
    values = onset.values
    if len(values) < tempogram_window:
        raise ValueError(
            f"insufficient frames: {len(values)} < tempogram window {tempogram_window}"
        )
    if not np.any(values > 0):
        return PulseCurve(values=np.zeros(len(values)), frame_rate=onset.frame_rate)

    # Light low-pass on the envelope: impulse-like onsets otherwise spread
    # equal energy across tempo harmonics and the argmax can lock onto one.
    kernel = np.hanning(SMOOTHING_FRAMES + 2)[1:-1]
    values = np.convolve(values, kernel / kernel.sum(), mode="same")

    n = len(values)
    win = tempogram_window
    pad = win // 2
    x = np.pad(values, pad, mode="constant")
    hann = np.hanning(win)

    # Tempo bins are DFT bins of the window length within [tempo_min, tempo_max].
    fps = onset.frame_rate
    bins = np.arange(1, win // 2 + 1)
    bpm = bins * fps / win * 60.0
    keep = (bpm >= tempo_min) & (bpm <= tempo_max)
    bins = bins[keep]
    if len(bins) == 0:
        raise ValueError("no tempo bins inside the requested BPM range")

    # Complex tempogram: hop 1, one column per tempo bin.
    t_idx = np.arange(win)
    basis = np.exp(-2j * np.pi * bins[None, :] * t_idx[:, None] / win)  # win x bins
    frames = np.lib.stride_tricks.sliding_window_view(x, win)[:n]  # n x win
    tempogram = (frames * hann) @ basis  # n x bins

    best = np.argmax(np.abs(tempogram), axis=1)
    phase = np.angle(tempogram[np.arange(n), best])

    # Overlap-add the optimal-phase kernel of each window.
    acc = np.zeros(n + 2 * pad)
    for w in range(n):
        k = bins[best[w]]
        kernel = hann * np.cos(2 * np.pi * k * t_idx / win + phase[w])
        acc[w : w + win] += kernel
    pulse = np.maximum(acc[pad : pad + n], 0.0)
    peak = pulse.max()
    if peak > 0:
        pulse /= peak
    return PulseCurve(values=pulse, frame_rate=onset.frame_rate)


def extract_beats(plp: PulseCurve, threshold: float = DEFAULT_BEAT_THRESHOLD) -> BeatGrid:
    """Local maxima of the pulse curve above threshold, as times in seconds."""
    if not (0 <= threshold < 1):
        raise ValueError("threshold must lie in [0, 1)")
    v = plp.values
    if len(v) < 3:
        idx = np.array([], dtype=int)
        if len(v) > 0 and v.max() > threshold:
            idx = np.array([int(np.argmax(v))])
        return BeatGrid(beat_times=idx / plp.frame_rate)
    is_peak = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]) & (v[1:-1] > threshold)
    idx = np.where(is_peak)[0] + 1
    return BeatGrid(beat_times=idx / plp.frame_rate)
