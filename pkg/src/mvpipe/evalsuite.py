"""Quantitative evaluation of rendered frames against reference images.

Two instruments: per-frame face verification percentages, and the
character-similarity time series (mean cosine similarity of each frame's
embedding against all reference embeddings).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

REPLICATION_VARIANCE = 1e-4
REPLICATION_MEAN = 0.98


@dataclass(frozen=True)
class FrameVerification:
    frame_index: int
    face_present: bool
    verified: bool

    def __post_init__(self):
        if self.verified and not self.face_present:
            raise ValueError("a frame cannot be verified without a face")


@dataclass(frozen=True)
class VerificationReport:
    pct_frames_with_participant: float
    pct_frames_no_face: float
    pct_face_frames_with_participant: float | None  # None when all faceless

    def to_dict(self) -> dict:
        third = self.pct_face_frames_with_participant
        return {
            "pct_frames_with_participant": self.pct_frames_with_participant,
            "pct_frames_no_face": self.pct_frames_no_face,
            "pct_face_frames_with_participant": (
                "undefined" if third is None else third
            ),
        }


def face_frame_metrics(frames: Sequence[FrameVerification]) -> VerificationReport:
    """Percent verified, percent faceless, and percent verified among face frames."""
    if not frames:
        raise ValueError("no frames to evaluate")
    total = len(frames)
    verified = sum(1 for f in frames if f.verified)
    no_face = sum(1 for f in frames if not f.face_present)
    face_frames = total - no_face
    return VerificationReport(
        pct_frames_with_participant=verified / total * 100.0,
        pct_frames_no_face=no_face / total * 100.0,
        pct_face_frames_with_participant=(
            verified / face_frames * 100.0 if face_frames > 0 else None
        ),
    )


def character_similarity(
    frame_embedding: np.ndarray, reference_embeddings: Sequence[np.ndarray]
) -> float:
    """Mean cosine similarity between one frame and all reference embeddings."""
    frame = np.asarray(frame_embedding, dtype=np.float64)
    fn = np.linalg.norm(frame)
    if fn == 0:
        raise ValueError("zero-norm frame embedding")
    sims = []
    for ref in reference_embeddings:
        ref = np.asarray(ref, dtype=np.float64)
        if ref.shape != frame.shape:
            raise ValueError(f"dimension mismatch: {ref.shape} vs {frame.shape}")
        rn = np.linalg.norm(ref)
        if rn == 0:
            raise ValueError("zero-norm reference embedding")
        sims.append(float(frame @ ref / (fn * rn)))
    if not sims:
        raise ValueError("no reference embeddings")
    return float(np.mean(sims))


class FaceVerifyClient(Protocol):
    """Detect-and-verify in one call: (face_present, participant_verified)."""

    def verify(self, image: bytes) -> tuple[bool, bool]: ...


@dataclass(frozen=True)
class MockFaceVerifyClient:
    """Hash-deterministic detect+verify stand-in for an external service."""

    def verify(self, image: bytes) -> tuple[bool, bool]:
        digest = hashlib.sha256(image).digest()
        face_present = digest[0] < 240  # ~94% of frames carry a face
        verified = face_present and digest[1] < 230
        return face_present, verified


class EmbeddingClient(Protocol):
    def embed(self, image: bytes) -> np.ndarray: ...


@dataclass(frozen=True)
class MockEmbeddingClient:
    """Deterministic hash-seeded embeddings; offline stand-in for CLIP."""

    dim: int = 64

    def embed(self, image: bytes) -> np.ndarray:
        digest = hashlib.sha256(image).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)


@dataclass(frozen=True)
class SimilarityTrack:
    """Per-second character similarity for one participant's video."""

    times: tuple[float, ...]
    values: tuple[float | None, ...]  # None marks an embedding-client gap

    def to_dict(self) -> dict:
        return {"times": list(self.times), "values": list(self.values)}


def similarity_track(
    frames: Sequence[bytes],
    references: Sequence[bytes],
    client: EmbeddingClient,
) -> SimilarityTrack:
    """Character similarity at 1 frame/second; client failures leave gaps."""
    ref_embeddings = [client.embed(r) for r in references]
    times, values = [], []
    for i, frame in enumerate(frames):
        times.append(float(i))
        try:
            values.append(character_similarity(client.embed(frame), ref_embeddings))
        except Exception:
            values.append(None)
    return SimilarityTrack(times=tuple(times), values=tuple(values))


@dataclass(frozen=True)
class TrackSummary:
    mean_track: tuple[float, ...]
    max_deviation_participant: int
    min_deviation_participant: int
    flags: tuple[str, ...]


def summarize_tracks(tracks: Sequence[SimilarityTrack]) -> TrackSummary:
    """Cross-participant mean track plus the max/min L2-deviation tracks.

    A near-constant track at similarity ~1 is flagged as possible
    training-data replication: genuine generation fluctuates.
    """
    if not tracks:
        raise ValueError("no tracks to summarize")
    n = min(len(t.values) for t in tracks)
    matrix = np.array(
        [[v if v is not None else np.nan for v in t.values[:n]] for t in tracks]
    )
    mean_track = np.nanmean(matrix, axis=0)
    deviations = [
        float(np.linalg.norm(np.nan_to_num(row - mean_track))) for row in matrix
    ]
    flags = []
    for i, row in enumerate(matrix):
        clean = row[~np.isnan(row)]
        if (
            len(clean) > 0
            and clean.var() < REPLICATION_VARIANCE
            and clean.mean() > REPLICATION_MEAN
        ):
            flags.append(f"possible training-data replication (participant {i})")
    return TrackSummary(
        mean_track=tuple(float(x) for x in mean_track),
        max_deviation_participant=int(np.argmax(deviations)),
        min_deviation_participant=int(np.argmin(deviations)),
        flags=tuple(flags),
    )
