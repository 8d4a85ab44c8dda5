"""Synthetic event generator with planted identities, bursts, and duplicates.

Every acceptance test measures against data produced here, so generation is
strictly deterministic for a fixed config: a single RNG, a fixed draw order,
and no iteration over unordered containers.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Iterator, Mapping

import numpy as np

from .errors import ConfigError
from .records import (
    SUPPORTED_DIMENSIONS,
    EventDataset,
    FaceRecord,
    GroundTruth,
    ImageRecord,
    PlantedGraph,
)

# Earliest generated capture time; an arbitrary fixed epoch offset.
BASE_TIME = 1_600_000_000
# Centroid spread relative to the requested minimum separation: typical
# centroid pairs land near twice the minimum, keeping rejection sampling rare.
SPREAD_FACTOR = 2.0
# Cap on expected centroid norm (~3x the "O(100)" regime the distance
# thresholds are calibrated for); separations requiring more fail loudly.
MAX_EXPECTED_NORM = 300.0
MAX_CENTROID_ATTEMPTS = 200
# Scenes are spaced 11-60 s apart: always beyond the duplicate window and the
# time-group window, so only bursts and planted duplicates sit inside them.
SCENE_GAP_RANGE = (11, 60)
GROUP_SIZE_RANGE = (1, 5)
LOW_QUALITY_RANGE = (0.05, 0.2)
HIGH_QUALITY_RANGE = (0.6, 1.0)
DUPLICATE_JITTER = 0.04


@dataclasses.dataclass(frozen=True)
class SynthConfig:
    """Knobs for one generated event."""

    n_participants: int
    n_images: int
    dimension: int = 128
    separation: float = 40.0  # minimum centroid distance, in units of sigma
    sigma: float = 2.0
    low_quality_prob: float = 0.1
    quality_noise_factor: float = 2.0
    n_blurry_participants: int = 0
    burst_length: int = 1
    burst_gap_s: int = 2
    duplicate_rate: float = 0.0
    n_communities: int = 4
    p_intra: float = 0.35
    p_inter: float = 0.03
    seed: int = 0
    event_id: str = "synthetic"

    def __post_init__(self) -> None:
        if self.n_participants < 1:
            raise ConfigError(f"n_participants must be positive, got {self.n_participants}")
        if self.n_images < 1:
            raise ConfigError(f"n_images must be positive, got {self.n_images}")
        if self.dimension not in SUPPORTED_DIMENSIONS:
            raise ConfigError(
                f"dimension must be one of {SUPPORTED_DIMENSIONS}, got {self.dimension}"
            )
        if self.separation <= 0:
            raise ConfigError(f"separation must be positive, got {self.separation}")
        if self.sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        for name in ("low_quality_prob", "duplicate_rate", "p_intra", "p_inter"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if self.quality_noise_factor < 0:
            raise ConfigError(
                f"quality_noise_factor must be non-negative, got {self.quality_noise_factor}"
            )
        if not 0 <= self.n_blurry_participants <= self.n_participants:
            raise ConfigError(
                f"n_blurry_participants must lie in [0, n_participants], "
                f"got {self.n_blurry_participants}"
            )
        if self.burst_length < 1:
            raise ConfigError(f"burst_length must be at least 1, got {self.burst_length}")
        if self.burst_gap_s < 1:
            raise ConfigError(f"burst_gap_s must be at least 1, got {self.burst_gap_s}")
        if self.n_communities < 1:
            raise ConfigError(f"n_communities must be at least 1, got {self.n_communities}")

    @classmethod
    def from_mapping(cls, data: Mapping[str, object]) -> "SynthConfig":
        field_names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - field_names)
        if unknown:
            raise ConfigError(f"unknown generator config keys: {', '.join(unknown)}")
        return cls(**data)  # type: ignore[arg-type]


@dataclasses.dataclass(frozen=True)
class SynthResult:
    """Generated event plus the oracle bookkeeping tests rely on."""

    dataset: EventDataset
    truth: GroundTruth
    planted_graph: PlantedGraph
    low_quality_faces: frozenset[str]
    blurry_participants: frozenset[str]
    duplicate_images: Mapping[str, str]  # duplicate image -> source image
    duplicate_faces: Mapping[str, str]  # duplicate face -> source face

    def __iter__(self) -> Iterator[object]:
        return iter((self.dataset, self.truth, self.planted_graph))


def _draw_centroids(rng: np.random.Generator, config: SynthConfig) -> np.ndarray:
    d = config.dimension
    min_dist = config.separation * config.sigma
    scale = min(SPREAD_FACTOR * min_dist / np.sqrt(2.0 * d), MAX_EXPECTED_NORM / np.sqrt(d))
    centroids = np.empty((config.n_participants, d), dtype=np.float64)
    for i in range(config.n_participants):
        for _ in range(MAX_CENTROID_ATTEMPTS):
            candidate = rng.normal(0.0, 1.0, size=d) * scale
            if i == 0:
                centroids[0] = candidate
                break
            gaps = np.sqrt(((centroids[:i] - candidate) ** 2).sum(axis=1))
            if float(gaps.min()) >= min_dist:
                centroids[i] = candidate
                break
        else:
            raise ConfigError(
                f"could not place {config.n_participants} identity centroids at "
                f"minimum separation {min_dist:g} (placed {i}); the requested "
                f"separation is infeasible at this scale"
            )
    return centroids


def _affinity_neighbors(rng: np.random.Generator, config: SynthConfig) -> list[list[int]]:
    """Symmetric community-structured affinity lists guiding who is photographed together."""
    p = config.n_participants
    community = np.empty(p, dtype=np.int64)
    perm = rng.permutation(p)
    for rank, participant in enumerate(perm):
        community[participant] = rank % config.n_communities
    neighbors: list[list[int]] = [[] for _ in range(p)]
    for i in range(p):
        for j in range(i + 1, p):
            prob = config.p_intra if community[i] == community[j] else config.p_inter
            if rng.random() < prob:
                neighbors[i].append(j)
                neighbors[j].append(i)
    return neighbors


def generate_synthetic_event(config: SynthConfig) -> SynthResult:
    """Generate one event: identities, images, bursts, duplicates, and truth."""
    rng = np.random.default_rng(config.seed)
    d = config.dimension
    centroids = _draw_centroids(rng, config)
    neighbors = _affinity_neighbors(rng, config)
    participant_ids = [f"p{i:04d}" for i in range(config.n_participants)]
    blurry = set(range(config.n_participants - config.n_blurry_participants, config.n_participants))

    images: list[ImageRecord] = []
    faces: list[FaceRecord] = []
    truth_faces: dict[str, set[str]] = {pid: set() for pid in participant_ids}
    edge_weights: dict[tuple[str, str], int] = {}
    low_quality: set[str] = set()
    duplicate_images: dict[str, str] = {}
    duplicate_faces: dict[str, str] = {}

    face_counter = 0
    image_counter = 0
    current_time = BASE_TIME

    def emit_image(
        group: list[int], time: int, source: ImageRecord | None = None
    ) -> ImageRecord:
        nonlocal face_counter, image_counter
        image_id = f"i{image_counter:05d}"
        image_counter += 1
        face_ids: list[str] = []
        for pos, p in enumerate(group):
            face_id = f"f{face_counter:06d}"
            face_counter += 1
            if source is None:
                if p in blurry:
                    low = True
                else:
                    low = rng.random() < config.low_quality_prob
                if low:
                    quality = float(rng.uniform(*LOW_QUALITY_RANGE))
                    noise_scale = config.sigma * (
                        1.0 + config.quality_noise_factor * (1.0 - quality)
                    )
                    low_quality.add(face_id)
                else:
                    quality = float(rng.uniform(*HIGH_QUALITY_RANGE))
                    noise_scale = config.sigma
                embedding = centroids[p] + rng.normal(0.0, 1.0, size=d) * noise_scale
            else:
                # near-identical re-shot: jitter the source face, keep its quality
                source_face_id = source.face_ids[pos]
                source_face = face_by_id[source_face_id]
                quality = source_face.quality_score
                embedding = source_face.embedding + rng.normal(0.0, 1.0, size=d) * (
                    DUPLICATE_JITTER * config.sigma
                )
                duplicate_faces[face_id] = source_face_id
                if source_face_id in low_quality:
                    low_quality.add(face_id)
            record = FaceRecord(
                face_id=face_id,
                image_id=image_id,
                embedding=embedding,
                quality_score=quality,
                ground_truth_id=participant_ids[p],
            )
            faces.append(record)
            face_by_id[face_id] = record
            face_ids.append(face_id)
            truth_faces[participant_ids[p]].add(face_id)
        image = ImageRecord(image_id=image_id, capture_time=time, face_ids=tuple(face_ids))
        images.append(image)
        for a_idx in range(len(group)):
            for b_idx in range(a_idx + 1, len(group)):
                a, b = participant_ids[group[a_idx]], participant_ids[group[b_idx]]
                key = (a, b) if a < b else (b, a)
                edge_weights[key] = edge_weights.get(key, 0) + 1
        return image

    face_by_id: dict[str, FaceRecord] = {}

    while image_counter < config.n_images:
        current_time += int(rng.integers(SCENE_GAP_RANGE[0], SCENE_GAP_RANGE[1] + 1))
        target_size = int(rng.integers(GROUP_SIZE_RANGE[0], GROUP_SIZE_RANGE[1] + 1))
        group = [int(rng.integers(0, config.n_participants))]
        while len(group) < target_size:
            candidates = sorted({nb for member in group for nb in neighbors[member]} - set(group))
            if not candidates:
                break
            group.append(int(candidates[int(rng.integers(0, len(candidates)))]))
        group.sort()

        n_burst = int(rng.integers(1, config.burst_length + 1))
        last = None
        for shot in range(n_burst):
            if image_counter >= config.n_images:
                break
            if shot > 0:
                current_time += int(rng.integers(1, config.burst_gap_s + 1))
            last = emit_image(group, current_time)
        if (
            last is not None
            and config.duplicate_rate > 0
            and image_counter < config.n_images
            and rng.random() < config.duplicate_rate
        ):
            current_time += 1
            dup = emit_image(group, current_time, source=last)
            duplicate_images[dup.image_id] = last.image_id

    dataset = EventDataset(
        event_id=config.event_id,
        dimension=d,
        images=tuple(images),
        faces=tuple(faces),
    )
    truth = GroundTruth(
        identities={pid: frozenset(fids) for pid, fids in truth_faces.items() if fids}
    )
    planted = PlantedGraph(
        nodes=frozenset(pid for pid, fids in truth_faces.items() if fids),
        edges=edge_weights,
    )
    return SynthResult(
        dataset=dataset,
        truth=truth,
        planted_graph=planted,
        low_quality_faces=frozenset(low_quality),
        blurry_participants=frozenset(
            participant_ids[p] for p in sorted(blurry) if truth_faces[participant_ids[p]]
        ),
        duplicate_images=duplicate_images,
        duplicate_faces=duplicate_faces,
    )
