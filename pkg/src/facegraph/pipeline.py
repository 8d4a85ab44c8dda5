"""The full clustering pipeline and its ablation variants."""

from __future__ import annotations

import dataclasses
import time
from collections.abc import MutableMapping

from .clustering import Clustering, PipelineConfig, cluster_initial
from .postprocess import (
    apply_must_links,
    enforce_cooccurrence,
    knn_assign,
    propagate_duplicate_labels,
    prune_low_quality_clusters,
)
from .preprocess import DuplicateMap, deduplicate_images, filter_faces, time_group_links
from .records import EventDataset

# Toggleable operations, in the order the pipeline applies them.
ABLATION_OPS = (
    "quality_filter",
    "deduplicate",
    "time_grouping",
    "cooccurrence",
    "knn",
    "prune_clusters",
)


def run_pipeline(
    dataset: EventDataset,
    config: PipelineConfig,
    *,
    timings: MutableMapping[str, float] | None = None,
) -> Clustering:
    """Apply the enabled operations in fixed order and return the clustering.

    Stage order: quality filter, image dedup, time-group link computation,
    initial clustering, must-link merging, co-occurrence splitting, kNN
    assignment, low-quality pruning, duplicate label propagation.  When
    ``timings`` is given it collects per-stage wall time in milliseconds.
    """

    def timed(name: str, fn, *args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        if timings is not None:
            timings[name] = (time.perf_counter() - start) * 1000.0
        return result

    provenance: list[str] = []
    if config.quality_filter:
        kept, rejected = timed(
            "quality_filter", filter_faces, dataset, config.quality_threshold
        )
        provenance.append("quality_filter")
    else:
        kept, rejected = dataset.face_ids, frozenset()

    if config.deduplicate:
        duplicates = timed(
            "deduplicate",
            deduplicate_images,
            dataset,
            kept,
            config.duplicate_window_s,
            config.duplicate_distance,
        )
        provenance.append("deduplicate")
    else:
        duplicates = DuplicateMap(image_map={}, face_map={})
    participating = kept - duplicates.duplicate_faces

    links: tuple = ()
    if config.time_grouping:
        links = timed(
            "time_grouping",
            time_group_links,
            dataset,
            participating,
            config.time_window_s,
            config.time_link_distance,
        )

    clustering = timed(
        "initial",
        cluster_initial,
        dataset,
        config,
        participating=participating,
        rejected=rejected,
        provenance=tuple(provenance),
    )
    if config.time_grouping:
        clustering = timed("must_links", apply_must_links, clustering, links, dataset)
    if config.cooccurrence:
        clustering = timed(
            "cooccurrence", enforce_cooccurrence, clustering, dataset, config.eps
        )
    if config.knn:
        clustering = timed(
            "knn_assign", knn_assign, clustering, dataset, config.knn_neighbors, config.knn_votes
        )
    if config.prune_clusters:
        clustering = timed(
            "prune", prune_low_quality_clusters, clustering, dataset, config.high_quality_threshold
        )
    if config.deduplicate:
        clustering = timed(
            "propagate_duplicates", propagate_duplicate_labels, clustering, duplicates, dataset
        )
    return clustering


def _with_ops(config: PipelineConfig, enabled: set[str]) -> PipelineConfig:
    changes = {op: (op in enabled) for op in ABLATION_OPS}
    return dataclasses.replace(config, **changes)


def ablation_rows(config: PipelineConfig) -> list[tuple[str, PipelineConfig]]:
    """Label/config pairs for the standard ablation sweep.

    One all-off baseline, each operation enabled alone, the operations
    enabled cumulatively in pipeline order, and the full configuration.
    """
    rows: list[tuple[str, PipelineConfig]] = [("none", _with_ops(config, set()))]
    for op in ABLATION_OPS:
        rows.append((f"only_{op}", _with_ops(config, {op})))
    enabled: set[str] = set()
    for i, op in enumerate(ABLATION_OPS, start=1):
        enabled.add(op)
        rows.append((f"cum{i}_{op}", _with_ops(config, set(enabled))))
    rows.append(("full", _with_ops(config, set(ABLATION_OPS))))
    return rows
