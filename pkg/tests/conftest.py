"""Shared fixtures and dataset builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from facegraph.records import EventDataset, FaceRecord, ImageRecord
from facegraph.synth import SynthConfig, SynthResult, generate_synthetic_event

DIM = 128


def axis_embedding(value: float, dim: int = DIM, axis: int = 0) -> np.ndarray:
    """Embedding with one controlled coordinate; pairwise distances along a
    shared axis equal the coordinate differences exactly."""
    v = np.zeros(dim, dtype=np.float64)
    v[axis] = float(value)
    return v


def build_event(images, *, dim: int = DIM, event_id: str = "fixture") -> EventDataset:
    """Assemble a dataset from (image_id, capture_time, faces) triples.

    Each face is (face_id, embedding, quality) or
    (face_id, embedding, quality, truth_id); a scalar embedding is shorthand
    for axis_embedding(scalar).
    """
    image_records = []
    face_records = []
    for image_id, capture_time, faces in images:
        face_ids = []
        for spec in faces:
            face_id, embedding, quality = spec[0], spec[1], spec[2]
            truth_id = spec[3] if len(spec) > 3 else None
            if np.isscalar(embedding):
                embedding = axis_embedding(float(embedding), dim=dim)
            face_ids.append(face_id)
            face_records.append(
                FaceRecord(
                    face_id=face_id,
                    image_id=image_id,
                    embedding=np.asarray(embedding, dtype=np.float64),
                    quality_score=quality,
                    ground_truth_id=truth_id,
                )
            )
        image_records.append(
            ImageRecord(image_id=image_id, capture_time=capture_time, face_ids=tuple(face_ids))
        )
    return EventDataset(
        event_id=event_id, dimension=dim, images=tuple(image_records), faces=tuple(face_records)
    )


EASY_CONFIG = SynthConfig(
    n_participants=50,
    n_images=400,
    separation=25.0,
    low_quality_prob=0.0,
    n_blurry_participants=0,
    duplicate_rate=0.0,
    burst_length=1,
    seed=3,
)

NOISY_CONFIG = SynthConfig(
    n_participants=50,
    n_images=400,
    separation=3.0,
    low_quality_prob=0.1,
    quality_noise_factor=2.0,
    n_blurry_participants=5,
    duplicate_rate=0.1,
    burst_length=3,
    burst_gap_s=2,
    seed=0,
)


@pytest.fixture(scope="session")
def easy_event() -> SynthResult:
    """Cleanly separable event: every face near its identity centroid."""
    return generate_synthetic_event(EASY_CONFIG)


@pytest.fixture(scope="session")
def noisy_event() -> SynthResult:
    """Crowded event: close centroids, blurry faces, duplicates, bursts."""
    return generate_synthetic_event(NOISY_CONFIG)


@pytest.fixture(scope="session")
def small_event() -> SynthResult:
    """Small, fast event with some of everything for integration tests."""
    return generate_synthetic_event(
        SynthConfig(
            n_participants=12,
            n_images=90,
            separation=25.0,
            low_quality_prob=0.1,
            duplicate_rate=0.1,
            burst_length=2,
            seed=5,
        )
    )
