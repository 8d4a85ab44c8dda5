"""Core data model for one event: images, faces, identities, planted graphs.

All types are immutable after construction and validate their invariants
eagerly, so any loaded or generated dataset that exists is consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import IntegrityError

SUPPORTED_DIMENSIONS = (128, 512)


def _as_embedding(values: Iterable[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise IntegrityError(f"embedding must be a flat vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise IntegrityError("embedding contains non-finite values")
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class FaceRecord:
    """One detected face: embedding vector, owning image, and quality score."""

    face_id: str
    image_id: str
    embedding: np.ndarray
    quality_score: float
    ground_truth_id: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "embedding", _as_embedding(self.embedding))
        if not 0.0 <= self.quality_score <= 1.0:
            raise IntegrityError(
                f"face {self.face_id!r}: quality_score {self.quality_score} not in [0, 1]"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FaceRecord):
            return NotImplemented
        return (
            self.face_id == other.face_id
            and self.image_id == other.image_id
            and self.quality_score == other.quality_score
            and self.ground_truth_id == other.ground_truth_id
            and np.array_equal(self.embedding, other.embedding)
        )

    def __hash__(self) -> int:
        return hash(self.face_id)


@dataclass(frozen=True)
class ImageRecord:
    """One photograph: capture time (integer seconds) and the faces on it."""

    image_id: str
    capture_time: int
    face_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "face_ids", tuple(self.face_ids))
        object.__setattr__(self, "capture_time", int(self.capture_time))
        if not self.face_ids:
            raise IntegrityError(f"image {self.image_id!r} lists no faces")
        if len(set(self.face_ids)) != len(self.face_ids):
            raise IntegrityError(f"image {self.image_id!r} lists a face twice")


@dataclass(frozen=True, eq=False)
class EventDataset:
    """All images and faces of one event, with referential integrity enforced."""

    event_id: str
    dimension: int
    images: tuple[ImageRecord, ...]
    faces: tuple[FaceRecord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "images", tuple(self.images))
        object.__setattr__(self, "faces", tuple(self.faces))
        self._validate()

    def _validate(self) -> None:
        if self.dimension not in SUPPORTED_DIMENSIONS:
            raise IntegrityError(
                f"dimension {self.dimension} unsupported; expected one of {SUPPORTED_DIMENSIONS}"
            )
        image_ids = [img.image_id for img in self.images]
        if len(set(image_ids)) != len(image_ids):
            dupe = next(i for i in image_ids if image_ids.count(i) > 1)
            raise IntegrityError(f"duplicate image_id {dupe!r}")
        face_ids = [f.face_id for f in self.faces]
        if len(set(face_ids)) != len(face_ids):
            dupe = next(i for i in face_ids if face_ids.count(i) > 1)
            raise IntegrityError(f"duplicate face_id {dupe!r}")

        by_image: dict[str, ImageRecord] = {img.image_id: img for img in self.images}
        listed: dict[str, str] = {}
        for img in self.images:
            for fid in img.face_ids:
                if fid in listed:
                    raise IntegrityError(
                        f"face {fid!r} listed on images {listed[fid]!r} and {img.image_id!r}"
                    )
                listed[fid] = img.image_id

        face_set = set(face_ids)
        for fid, iid in listed.items():
            if fid not in face_set:
                raise IntegrityError(f"image {iid!r} lists unknown face {fid!r}")
        for f in self.faces:
            if f.image_id not in by_image:
                raise IntegrityError(f"face {f.face_id!r} references missing image {f.image_id!r}")
            if listed.get(f.face_id) != f.image_id:
                raise IntegrityError(
                    f"face {f.face_id!r} not listed on its image {f.image_id!r}"
                )
            if f.embedding.shape[0] != self.dimension:
                raise IntegrityError(
                    f"face {f.face_id!r} has dimension {f.embedding.shape[0]}, "
                    f"dataset dimension is {self.dimension}"
                )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventDataset):
            return NotImplemented
        return (
            self.event_id == other.event_id
            and self.dimension == other.dimension
            and self.images == other.images
            and self.faces == other.faces
        )

    def __hash__(self) -> int:
        return hash((self.event_id, self.dimension, len(self.faces)))

    @cached_property
    def faces_by_id(self) -> Mapping[str, FaceRecord]:
        return {f.face_id: f for f in self.faces}

    @cached_property
    def images_by_id(self) -> Mapping[str, ImageRecord]:
        return {img.image_id: img for img in self.images}

    @cached_property
    def face_ids(self) -> frozenset[str]:
        return frozenset(f.face_id for f in self.faces)

    @cached_property
    def sorted_face_ids(self) -> tuple[str, ...]:
        return tuple(sorted(f.face_id for f in self.faces))

    @cached_property
    def face_row(self) -> Mapping[str, int]:
        """Row index of each face in :attr:`embedding_matrix` (sorted by face_id)."""
        return {fid: i for i, fid in enumerate(self.sorted_face_ids)}

    @cached_property
    def embedding_matrix(self) -> np.ndarray:
        """(n_faces, dimension) float64 matrix, rows ordered by sorted face_id."""
        by_id = self.faces_by_id
        mat = np.empty((len(self.faces), self.dimension), dtype=np.float64)
        for i, fid in enumerate(self.sorted_face_ids):
            mat[i] = by_id[fid].embedding
        mat.flags.writeable = False
        return mat

    def capture_time_of(self, face_id: str) -> int:
        return self.images_by_id[self.faces_by_id[face_id].image_id].capture_time

    def embeddings_for(self, face_ids: Iterable[str]) -> np.ndarray:
        rows = [self.face_row[fid] for fid in face_ids]
        return self.embedding_matrix[rows]


@dataclass(frozen=True)
class GroundTruth:
    """Mapping from participant identity to the set of that person's faces."""

    identities: Mapping[str, frozenset[str]]

    def __post_init__(self) -> None:
        frozen = {pid: frozenset(fids) for pid, fids in self.identities.items()}
        object.__setattr__(self, "identities", frozen)
        seen: dict[str, str] = {}
        for pid, fids in frozen.items():
            for fid in fids:
                if fid in seen:
                    raise IntegrityError(
                        f"face {fid!r} labeled as both {seen[fid]!r} and {pid!r}"
                    )
                seen[fid] = pid

    @cached_property
    def label_of(self) -> Mapping[str, str]:
        return {fid: pid for pid, fids in self.identities.items() for fid in fids}

    @cached_property
    def all_faces(self) -> frozenset[str]:
        return frozenset(self.label_of)

    def validate_against(self, dataset: EventDataset) -> None:
        unknown = self.all_faces - dataset.face_ids
        if unknown:
            raise IntegrityError(
                f"ground truth references unknown faces: {sorted(unknown)[:5]}"
            )


@dataclass(frozen=True)
class PlantedGraph:
    """Ground-truth co-appearance graph over participants.

    Edge weight counts the generated images on which both participants appear.
    """

    nodes: frozenset[str]
    edges: Mapping[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        normalized: dict[tuple[str, str], int] = {}
        for (a, b), w in self.edges.items():
            if a == b:
                raise IntegrityError(f"self-loop on {a!r}")
            if a not in self.nodes or b not in self.nodes:
                raise IntegrityError(f"edge ({a!r}, {b!r}) references unknown node")
            if w < 1:
                raise IntegrityError(f"edge ({a!r}, {b!r}) has weight {w} < 1")
            key = (a, b) if a < b else (b, a)
            if key in normalized and normalized[key] != w:
                raise IntegrityError(f"conflicting weights for edge {key}")
            normalized[key] = int(w)
        object.__setattr__(self, "edges", normalized)

    def degree(self, node: str) -> int:
        return sum(1 for a, b in self.edges if node in (a, b))

    def total_weight(self, node: str) -> int:
        return sum(w for (a, b), w in self.edges.items() if node in (a, b))

    def edge_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(self.edges)
