"""Valence/arousal tracking on the circumplex model of affect.

A pluggable regressor predicts a valence/arousal pair per audio window.
The tracker keeps a running sum of those pairs as a position in affect
space and emits an event whenever the position crosses into a new
quadrant. Quadrant layout: valence sign splits Melancholy/Tense (negative)
from Serene/Euphoric (non-negative); arousal sign splits the low row
(Melancholy, Serene) from the high row (Tense, Euphoric). Axis values
(v == 0 or a == 0) resolve to the non-negative side.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .audio.spectral import WindowFeatures


class EmotionQuadrant(Enum):
    MELANCHOLY = "melancholy"  # v < 0, a < 0
    SERENE = "serene"  # v >= 0, a < 0
    TENSE = "tense"  # v < 0, a >= 0
    EUPHORIC = "euphoric"  # v >= 0, a >= 0


@dataclass(frozen=True)
class ValenceArousal:
    valence: float
    arousal: float

    def __post_init__(self):
        if not (np.isfinite(self.valence) and np.isfinite(self.arousal)):
            raise ValueError("valence/arousal must be finite")
        object.__setattr__(self, "valence", float(np.clip(self.valence, -1.0, 1.0)))
        object.__setattr__(self, "arousal", float(np.clip(self.arousal, -1.0, 1.0)))


def quadrant(valence: float, arousal: float) -> EmotionQuadrant:
    """Total map from a (valence, arousal) position to its quadrant."""
    if valence >= 0:
        return EmotionQuadrant.EUPHORIC if arousal >= 0 else EmotionQuadrant.SERENE
    return EmotionQuadrant.TENSE if arousal >= 0 else EmotionQuadrant.MELANCHOLY


@dataclass(frozen=True)
class EmotionEvent:
    time: float  # window start, seconds
    quadrant: EmotionQuadrant


@dataclass
class EmotionState:
    """Running-sum position in affect space; single-writer, sequential."""

    v_sum: float = 0.0
    a_sum: float = 0.0
    windows_seen: int = 0
    last_window_start: float = float("-inf")
    decay: float = 1.0  # 1.0 = literal undecayed running sum

    @property
    def current_quadrant(self) -> EmotionQuadrant:
        return quadrant(self.v_sum, self.a_sum)


class VaRegressor(Protocol):
    input_dim: int

    def predict(self, vector: np.ndarray) -> ValenceArousal: ...


@dataclass(frozen=True)
class AffineVaRegressor:
    """weights (2 x D) @ features + bias, clamped to [-1, 1] squared."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != 2 or b.shape != (2,):
            raise ValueError("weights must be 2 x D and bias length 2")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def input_dim(self) -> int:
        return self.weights.shape[1]

    def predict(self, vector: np.ndarray) -> ValenceArousal:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.input_dim,):
            raise ValueError(
                f"feature dimension {vector.shape} does not match regressor "
                f"input dimension ({self.input_dim},)"
            )
        v, a = self.weights @ vector + self.bias
        return ValenceArousal(valence=v, arousal=a)

    @classmethod
    def load(cls, path: str | Path) -> "AffineVaRegressor":
        """Load from JSON: {"input_dim": D, "weights": [2*D row-major], "bias": [2]}."""
        d = json.loads(Path(path).read_text())
        dim = int(d["input_dim"])
        w = np.array(d["weights"], dtype=np.float64).reshape(2, dim)
        return cls(weights=w, bias=np.array(d["bias"], dtype=np.float64))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(
                {
                    "input_dim": self.input_dim,
                    "weights": self.weights.ravel().tolist(),
                    "bias": self.bias.tolist(),
                }
            )
        )


def predict_va(regressor: VaRegressor, features: WindowFeatures) -> ValenceArousal:
    return regressor.predict(features.vector)


def update_position(
    state: EmotionState, va: ValenceArousal, window_start: float
) -> tuple[EmotionState, EmotionEvent | None]:
    """Consume one window's VA pair; emit an event on quadrant change.

    The first-ever window always emits its quadrant so downstream always
    has an emotion annotation from the start of the track.
    """
    if window_start < state.last_window_start:
        raise ValueError(
            f"windows must be consumed in ascending order: "
            f"{window_start} < {state.last_window_start}"
        )
    first = state.windows_seen == 0
    prev_quadrant = state.current_quadrant
    new = EmotionState(
        v_sum=state.v_sum * state.decay + va.valence,
        a_sum=state.a_sum * state.decay + va.arousal,
        windows_seen=state.windows_seen + 1,
        last_window_start=window_start,
        decay=state.decay,
    )
    if first or new.current_quadrant != prev_quadrant:
        return new, EmotionEvent(time=window_start, quadrant=new.current_quadrant)
    return new, None


def emotion_track(
    regressor: VaRegressor, features: Sequence[WindowFeatures]
) -> list[EmotionEvent]:
    """Fold update_position over time-ordered windows."""
    state = EmotionState()
    events = []
    for f in features:
        state, event = update_position(state, predict_va(regressor, f), f.window_start)
        if event is not None:
            events.append(event)
    return events


def events_from_va_track(
    track: Sequence[tuple[float, ValenceArousal]]
) -> list[EmotionEvent]:
    """Emotion events from a precomputed (window_start, VA) track."""
    state = EmotionState()
    events = []
    for t, va in track:
        state, event = update_position(state, va, t)
        if event is not None:
            events.append(event)
    return events


def load_va_track(path: str | Path) -> list[tuple[float, ValenceArousal]]:
    """Load a VA track file: JSON list of [window_start, valence, arousal]."""
    rows = json.loads(Path(path).read_text())
    return [(float(t), ValenceArousal(valence=v, arousal=a)) for t, v, a in rows]
