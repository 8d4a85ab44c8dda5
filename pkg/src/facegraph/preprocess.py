"""Pre-clustering operations: quality filtering, time grouping, deduplication."""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import expit

from . import kernels
from .errors import ConfigError, IntegrityError
from .records import EventDataset, FaceRecord

MustLink = tuple[str, str]


@dataclasses.dataclass(frozen=True)
class QualityModel:
    """Logistic recognizability scorer over embeddings (label 1 = recognizable)."""

    weights: np.ndarray
    bias: float
    feature_mean: np.ndarray
    feature_scale: np.ndarray

    def score(self, face: "FaceRecord | np.ndarray") -> float:
        embedding = face.embedding if isinstance(face, FaceRecord) else face
        x = (np.asarray(embedding, dtype=np.float64) - self.feature_mean) / self.feature_scale
        return float(expit(x @ self.weights + self.bias))


def train_quality_classifier(
    faces: Sequence[FaceRecord],
    labels: Sequence[int],
    *,
    iterations: int = 300,
    learning_rate: float = 0.5,
    seed: int = 0,
) -> QualityModel:
    """Fit a logistic classifier separating recognizable (1) from junk (0) faces.

    Plain full-batch gradient descent with a fixed iteration count, so the
    fitted weights depend only on the inputs and the seed.
    """
    if len(faces) != len(labels):
        raise IntegrityError(f"{len(faces)} faces but {len(labels)} labels")
    if not faces:
        raise ConfigError("training requires at least one face per class")
    y = np.asarray(labels, dtype=np.float64)
    if not set(np.unique(y)) <= {0.0, 1.0}:
        raise ConfigError("labels must be 0 (unrecognizable) or 1 (recognizable)")
    if len(np.unique(y)) < 2:
        raise ConfigError("training requires both a 0-labeled and a 1-labeled example")
    dims = {f.embedding.shape[0] for f in faces}
    if len(dims) != 1:
        raise IntegrityError(f"mixed embedding dimensions in training faces: {sorted(dims)}")

    x = np.stack([f.embedding for f in faces]).astype(np.float64)
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale < 1e-9] = 1.0
    xs = (x - mean) / scale

    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 0.01, size=xs.shape[1])
    b = 0.0
    n = len(y)
    for _ in range(iterations):
        p = expit(xs @ w + b)
        err = p - y
        w -= learning_rate * (xs.T @ err) / n
        b -= learning_rate * float(err.sum()) / n
    w.flags.writeable = False
    return QualityModel(weights=w, bias=b, feature_mean=mean, feature_scale=scale)


def filter_faces(dataset: EventDataset, threshold: float) -> tuple[frozenset[str], frozenset[str]]:
    """Split faces into (kept, rejected) by quality score; score < threshold rejects."""
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"quality threshold must lie in [0, 1], got {threshold}")
    rejected = frozenset(f.face_id for f in dataset.faces if f.quality_score < threshold)
    kept = dataset.face_ids - rejected
    return kept, rejected


def time_group_links(
    dataset: EventDataset,
    kept: Iterable[str],
    window_s: int,
    max_distance: float,
) -> tuple[MustLink, ...]:
    """Must-link pairs: close in capture time, close in embedding space.

    A pair qualifies when the two faces sit on different images taken at most
    ``window_s`` seconds apart and their embedding distance is at most
    ``max_distance``.  Faces sharing an image never link (they cannot be the
    same person), which is why the distance cutoff can be more permissive
    than the clustering radius.
    """
    if window_s < 0:
        raise ConfigError(f"time window must be non-negative, got {window_s}")
    if max_distance <= 0:
        raise ConfigError(f"link distance must be positive, got {max_distance}")

    pool = sorted(kept)
    if not pool:
        return ()
    order = sorted(pool, key=lambda fid: (dataset.capture_time_of(fid), fid))
    times = np.array([dataset.capture_time_of(fid) for fid in order], dtype=np.int64)
    x = dataset.embeddings_for(order)
    max_sq = float(max_distance) * float(max_distance)

    links: list[MustLink] = []
    hi = 0
    for i in range(len(order)):
        if hi < i + 1:
            hi = i + 1
        while hi < len(order) and times[hi] - times[i] <= window_s:
            hi += 1
        if hi == i + 1:
            continue
        sq = kernels.pairwise_sq_dists(x[i : i + 1], x[i + 1 : hi])[0]
        image_i = dataset.faces_by_id[order[i]].image_id
        for off in np.flatnonzero(sq <= max_sq):
            j = i + 1 + int(off)
            if dataset.faces_by_id[order[j]].image_id == image_i:
                continue
            a, b = order[i], order[j]
            links.append((a, b) if a < b else (b, a))
    return tuple(sorted(set(links)))


@dataclasses.dataclass(frozen=True)
class DuplicateMap:
    """Near-duplicate images mapped to their representatives.

    ``image_map`` sends each duplicate image to its representative;
    ``face_map`` records the per-face greedy matching (duplicate face →
    representative face) used both to sideline faces before clustering and
    to copy labels back afterwards.
    """

    image_map: Mapping[str, str]
    face_map: Mapping[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "image_map", dict(sorted(self.image_map.items())))
        object.__setattr__(self, "face_map", dict(sorted(self.face_map.items())))
        for dup, rep in self.image_map.items():
            if rep in self.image_map:
                raise IntegrityError(
                    f"representative {rep!r} of {dup!r} is itself marked duplicate"
                )
            if dup == rep:
                raise IntegrityError(f"image {dup!r} marked duplicate of itself")

    @property
    def duplicate_faces(self) -> frozenset[str]:
        return frozenset(self.face_map)

    def __len__(self) -> int:
        return len(self.image_map)


def _match_image_faces(
    dataset: EventDataset,
    u_faces: Sequence[str],
    v_faces: Sequence[str],
    max_distance: float,
) -> list[tuple[str, str]] | None:
    """Greedy min-distance perfect matching from u's faces onto v's, or None.

    Pairs are claimed in ascending (distance, face_u, face_v) order; the
    matching fails if any claimed pair exceeds ``max_distance``.
    """
    if len(u_faces) != len(v_faces):
        return None
    xu = dataset.embeddings_for(u_faces)
    xv = dataset.embeddings_for(v_faces)
    sq = kernels.pairwise_sq_dists(xu, xv)
    candidates = sorted(
        ((float(sq[a, b]), u_faces[a], v_faces[b]) for a in range(len(u_faces)) for b in range(len(v_faces))),
        key=lambda t: (t[0], t[1], t[2]),
    )
    max_sq = float(max_distance) * float(max_distance)
    used_u: set[str] = set()
    used_v: set[str] = set()
    matching: list[tuple[str, str]] = []
    for d, fu, fv in candidates:
        if fu in used_u or fv in used_v:
            continue
        if d > max_sq:
            return None
        matching.append((fu, fv))
        used_u.add(fu)
        used_v.add(fv)
        if len(matching) == len(u_faces):
            return matching
    return None


def deduplicate_images(
    dataset: EventDataset,
    kept: Iterable[str],
    window_s: int,
    max_distance: float,
) -> DuplicateMap:
    """Detect near-duplicate images among those with at least one kept face.

    An image is a duplicate of an earlier representative when the two were
    captured at most ``window_s`` seconds apart, hold the same number of
    faces, and a greedy minimal-distance matching pairs all faces within
    ``max_distance``.  Matching runs over every face of both images — the
    quality filter decides who gets clustered, not what the camera saw.
    """
    if window_s < 0:
        raise ConfigError(f"duplicate window must be non-negative, got {window_s}")
    kept_set = set(kept)
    candidates = [
        img for img in dataset.images if any(f in kept_set for f in img.face_ids)
    ]
    candidates.sort(key=lambda img: (img.capture_time, img.image_id))

    image_map: dict[str, str] = {}
    face_map: dict[str, str] = {}
    representatives: list[int] = []
    for idx, img in enumerate(candidates):
        matched = False
        for r in representatives:
            rep = candidates[r]
            if img.capture_time - rep.capture_time > window_s:
                continue
            matching = _match_image_faces(
                dataset, list(img.face_ids), list(rep.face_ids), max_distance
            )
            if matching is None:
                continue
            image_map[img.image_id] = rep.image_id
            for fu, fv in matching:
                face_map[fu] = fv
            matched = True
            break
        if not matched:
            representatives.append(idx)
    return DuplicateMap(image_map=image_map, face_map=face_map)
