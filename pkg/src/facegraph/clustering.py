"""Cluster containers, pipeline configuration, and initial clustering."""

from __future__ import annotations

import dataclasses
from collections.abc import Iterable, Mapping
from functools import cached_property

import numpy as np

from . import kernels
from .errors import ConfigError, IntegrityError
from .records import EventDataset

INITIAL_ALGORITHMS = ("dbscan", "kmeans", "random")


@dataclasses.dataclass(frozen=True)
class PipelineConfig:
    """Tunable knobs for the full clustering pipeline.

    Defaults reproduce the standard configuration: density-based initial
    clustering at eps 50 / min_samples 3 on raw embedding distance, 5-nearest
    neighbour assignment requiring 4 agreeing votes, and all refinement
    stages enabled.
    """

    quality_filter: bool = True
    quality_threshold: float = 0.3
    time_grouping: bool = True
    time_window_s: int = 10
    time_link_distance: float = 75.0
    deduplicate: bool = True
    duplicate_window_s: int = 3
    duplicate_distance: float = 25.0
    algorithm: str = "dbscan"
    eps: float = 50.0
    min_samples: int = 3
    n_clusters: int = 50
    cooccurrence: bool = True
    knn: bool = True
    knn_neighbors: int = 5
    knn_votes: int = 4
    prune_clusters: bool = True
    high_quality_threshold: float = 0.6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.algorithm not in INITIAL_ALGORITHMS:
            raise ConfigError(
                f"unknown algorithm {self.algorithm!r}; expected one of {INITIAL_ALGORITHMS}"
            )
        for name in ("quality_threshold", "high_quality_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        for name in ("time_link_distance", "duplicate_distance", "eps"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ConfigError(f"{name} must be positive, got {value}")
        for name in ("time_window_s", "duplicate_window_s"):
            value = getattr(self, name)
            if value < 0:
                raise ConfigError(f"{name} must be non-negative, got {value}")
        for name in ("min_samples", "n_clusters", "knn_neighbors", "knn_votes"):
            value = getattr(self, name)
            if value < 1:
                raise ConfigError(f"{name} must be at least 1, got {value}")
        if self.knn_votes > self.knn_neighbors:
            raise ConfigError(
                f"knn_votes ({self.knn_votes}) cannot exceed knn_neighbors ({self.knn_neighbors})"
            )

    @classmethod
    def from_mapping(cls, data: Mapping[str, object]) -> "PipelineConfig":
        field_names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - field_names)
        if unknown:
            raise ConfigError(f"unknown pipeline config keys: {', '.join(unknown)}")
        return cls(**data)  # type: ignore[arg-type]


def _freeze_members(members: Iterable[str]) -> frozenset[str]:
    out = frozenset(str(m) for m in members)
    return out


@dataclasses.dataclass(frozen=True, eq=False)
class Clustering:
    """An assignment of face ids to named clusters.

    ``clusters`` maps cluster id to its member faces; ``unassigned`` holds
    faces that took part in clustering but got no label; ``rejected`` holds
    faces excluded before clustering.  The three parts are mutually disjoint.
    ``provenance`` records the pipeline stages that produced this state, in
    order.
    """

    clusters: Mapping[str, frozenset[str]]
    unassigned: frozenset[str]
    rejected: frozenset[str]
    provenance: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        frozen = {str(cid): _freeze_members(members) for cid, members in self.clusters.items()}
        object.__setattr__(self, "clusters", dict(sorted(frozen.items())))
        object.__setattr__(self, "unassigned", frozenset(str(f) for f in self.unassigned))
        object.__setattr__(self, "rejected", frozenset(str(f) for f in self.rejected))
        object.__setattr__(self, "provenance", tuple(str(p) for p in self.provenance))
        seen: set[str] = set()
        for cid, members in self.clusters.items():
            if not cid:
                raise IntegrityError("cluster ids must be non-empty strings")
            if not members:
                raise IntegrityError(f"cluster {cid!r} has no members")
            overlap = seen & members
            if overlap:
                raise IntegrityError(
                    f"face(s) {sorted(overlap)[:3]} appear in more than one cluster"
                )
            seen |= members
        for label, group in (("unassigned", self.unassigned), ("rejected", self.rejected)):
            overlap = seen & group
            if overlap:
                raise IntegrityError(
                    f"face(s) {sorted(overlap)[:3]} are both clustered and {label}"
                )
            seen |= group

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Clustering):
            return NotImplemented
        return (
            self.clusters == other.clusters
            and self.unassigned == other.unassigned
            and self.rejected == other.rejected
            and self.provenance == other.provenance
        )

    @cached_property
    def all_faces(self) -> frozenset[str]:
        faces = set(self.unassigned) | set(self.rejected)
        for members in self.clusters.values():
            faces |= members
        return frozenset(faces)

    @cached_property
    def assignment(self) -> Mapping[str, str]:
        """face id -> cluster id, for clustered faces only."""
        out: dict[str, str] = {}
        for cid, members in self.clusters.items():
            for face in members:
                out[face] = cid
        return out

    def cluster_of(self, face_id: str) -> str | None:
        return self.assignment.get(face_id)

    def validate_against(self, dataset: EventDataset) -> None:
        if self.all_faces != dataset.face_ids:
            missing = sorted(dataset.face_ids - self.all_faces)[:3]
            extra = sorted(self.all_faces - dataset.face_ids)[:3]
            raise IntegrityError(
                f"clustering does not partition the dataset faces "
                f"(missing={missing}, extra={extra})"
            )

    def with_stage(
        self,
        stage: str,
        *,
        clusters: Mapping[str, Iterable[str]] | None = None,
        unassigned: Iterable[str] | None = None,
        rejected: Iterable[str] | None = None,
    ) -> "Clustering":
        """A copy with ``stage`` appended to provenance and fields replaced."""
        return Clustering(
            clusters=self.clusters if clusters is None else clusters,  # type: ignore[arg-type]
            unassigned=self.unassigned if unassigned is None else frozenset(unassigned),
            rejected=self.rejected if rejected is None else frozenset(rejected),
            provenance=self.provenance + (stage,),
        )


def _labels_to_clusters(
    face_ids: list[str], labels: np.ndarray
) -> tuple[dict[str, list[str]], list[str]]:
    """Relabel integer cluster labels to stable string ids by first occurrence."""
    names: dict[int, str] = {}
    clusters: dict[str, list[str]] = {}
    leftovers: list[str] = []
    for face, label in zip(face_ids, labels):
        label = int(label)
        if label == kernels.NOISE:
            leftovers.append(face)
            continue
        name = names.get(label)
        if name is None:
            name = f"c{len(names):03d}"
            names[label] = name
            clusters[name] = []
        clusters[name].append(face)
    return clusters, leftovers


def cluster_initial(
    dataset: EventDataset,
    config: PipelineConfig,
    *,
    participating: Iterable[str] | None = None,
    rejected: Iterable[str] = (),
    provenance: tuple[str, ...] = (),
) -> Clustering:
    """Run the configured initial clustering over ``participating`` faces.

    Faces outside ``participating`` and ``rejected`` (for example faces on
    removed duplicate images) come back unassigned, as does density noise.
    """
    rejected_set = frozenset(rejected)
    if participating is None:
        pool = sorted(dataset.face_ids - rejected_set)
    else:
        pool = sorted(set(participating))
    overlap = rejected_set & set(pool)
    if overlap:
        raise IntegrityError(f"faces {sorted(overlap)[:3]} are both participating and rejected")
    sidelined = dataset.face_ids - set(pool) - rejected_set

    if not pool:
        raise IntegrityError("initial clustering requires at least one participating face")
    if config.algorithm != "dbscan" and config.n_clusters > len(pool):
        raise ConfigError(
            f"n_clusters ({config.n_clusters}) exceeds participating faces ({len(pool)})"
        )

    x = dataset.embeddings_for(pool)
    if config.algorithm == "dbscan":
        labels = kernels.dbscan_labels(x, config.eps, config.min_samples)
    elif config.algorithm == "kmeans":
        from sklearn.cluster import KMeans

        model = KMeans(n_clusters=config.n_clusters, n_init=10, random_state=config.seed)
        labels = model.fit_predict(np.asarray(x))
    else:  # random
        rng = np.random.default_rng(config.seed)
        labels = rng.integers(0, config.n_clusters, size=len(pool))

    clusters, noise = _labels_to_clusters(pool, np.asarray(labels))
    return Clustering(
        clusters=clusters,
        unassigned=frozenset(noise) | sidelined,
        rejected=rejected_set,
        provenance=provenance + (f"initial:{config.algorithm}",),
    )
