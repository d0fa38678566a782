"""Serializable analysis bundle: everything downstream stages need."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .buffer import AudioBuffer, load_wav
from .pulse import BeatGrid, PulseCurve, extract_beats, predominant_local_pulse
from .spectral import (
    FEATURE_NAMES,
    OnsetEnvelope,
    WindowFeatures,
    compute_spectrogram,
    onset_strength,
    window_features,
)


@dataclass(frozen=True)
class AnalysisBundle:
    duration: float
    onset: OnsetEnvelope
    pulse: PulseCurve
    beats: BeatGrid
    features: list[WindowFeatures]

    def to_dict(self) -> dict:
        return {
            "duration": self.duration,
            "frame_rate": self.onset.frame_rate,
            "onset_envelope": self.onset.values.tolist(),
            "pulse_curve": self.pulse.values.tolist(),
            "beat_times": self.beats.beat_times.tolist(),
            "feature_names": list(FEATURE_NAMES),
            "window_features": [
                {
                    "window_start": f.window_start,
                    "window_length": f.window_length,
                    "vector": f.vector.tolist(),
                }
                for f in self.features
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisBundle":
        fr = d["frame_rate"]
        return cls(
            duration=d["duration"],
            onset=OnsetEnvelope(values=np.array(d["onset_envelope"]), frame_rate=fr),
            pulse=PulseCurve(values=np.array(d["pulse_curve"]), frame_rate=fr),
            beats=BeatGrid(beat_times=np.array(d["beat_times"])),
            features=[
                WindowFeatures(
                    window_start=f["window_start"],
                    window_length=f["window_length"],
                    vector=np.array(f["vector"]),
                )
                for f in d["window_features"]
            ],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: str | Path) -> "AnalysisBundle":
        return cls.from_dict(json.loads(Path(path).read_text()))


def analyze(audio: AudioBuffer) -> AnalysisBundle:
    """Run the full deterministic analysis chain over decoded audio."""
    spec = compute_spectrogram(audio)
    onset = onset_strength(spec)
    try:
        pulse = predominant_local_pulse(onset)
    except ValueError:
        # Track shorter than one tempogram window: no usable pulse.
        pulse = PulseCurve(values=np.zeros(len(onset.values)), frame_rate=onset.frame_rate)
    beats = extract_beats(pulse)
    feats = window_features(audio)
    return AnalysisBundle(
        duration=audio.duration, onset=onset, pulse=pulse, beats=beats, features=feats
    )


def analyze_file(path: str | Path) -> AnalysisBundle:
    return analyze(load_wav(path))
