"""Post-clustering operations: must-links, co-occurrence, kNN, pruning, duplicates."""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Sequence

import numpy as np

from . import kernels
from .clustering import Clustering
from .preprocess import DuplicateMap, MustLink
from .records import EventDataset

log = logging.getLogger(__name__)


def _image_of(dataset: EventDataset, face_id: str) -> str:
    return dataset.faces_by_id[face_id].image_id


def _images_of_members(dataset: EventDataset, members: Iterable[str]) -> set[str]:
    return {_image_of(dataset, f) for f in members}


def apply_must_links(
    clustering: Clustering, links: Sequence[MustLink], dataset: EventDataset
) -> Clustering:
    """Merge clusters joined by must-link pairs; pull linked unassigned faces in.

    A merge or join is skipped (and logged) whenever it would put two faces
    from one image into the same cluster — the co-occurrence constraint
    always wins.  Links touching rejected or absent faces are ignored.
    Merging is transitive: passes repeat until nothing changes.
    """
    clusters: dict[str, set[str]] = {cid: set(m) for cid, m in clustering.clusters.items()}
    images: dict[str, set[str]] = {
        cid: _images_of_members(dataset, m) for cid, m in clusters.items()
    }
    assign: dict[str, str] = {f: cid for cid, m in clusters.items() for f in m}
    unassigned = set(clustering.unassigned)
    ordered = sorted(set(links))

    changed = True
    while changed:
        changed = False
        for a, b in ordered:
            ca, cb = assign.get(a), assign.get(b)
            if ca is not None and cb is not None:
                if ca == cb:
                    continue
                keep, drop = (ca, cb) if ca < cb else (cb, ca)
                if images[keep] & images[drop]:
                    log.debug(
                        "must-link (%s, %s): merge %s+%s skipped, shared image", a, b, keep, drop
                    )
                    continue
                for f in clusters[drop]:
                    assign[f] = keep
                clusters[keep] |= clusters.pop(drop)
                images[keep] |= images.pop(drop)
                changed = True
            elif ca is not None and b in unassigned:
                if _image_of(dataset, b) in images[ca]:
                    log.debug("must-link (%s, %s): join of %s skipped, shared image", a, b, b)
                    continue
                clusters[ca].add(b)
                images[ca].add(_image_of(dataset, b))
                assign[b] = ca
                unassigned.discard(b)
                changed = True
            elif cb is not None and a in unassigned:
                if _image_of(dataset, a) in images[cb]:
                    log.debug("must-link (%s, %s): join of %s skipped, shared image", a, b, a)
                    continue
                clusters[cb].add(a)
                images[cb].add(_image_of(dataset, a))
                assign[a] = cb
                unassigned.discard(a)
                changed = True
            # both unassigned (or rejected/absent): no cluster to join, skip

    return clustering.with_stage("must_links", clusters=clusters, unassigned=unassigned)


def _split_cluster(
    dataset: EventDataset, members: Sequence[str], stop_distance: float
) -> list[list[str]]:
    """Re-cluster one violating cluster under the same-image cannot-link."""
    ordered = sorted(members)
    x = dataset.embeddings_for(ordered)
    image_code: dict[str, int] = {}
    groups = np.empty(len(ordered), dtype=np.int64)
    for i, fid in enumerate(ordered):
        img = _image_of(dataset, fid)
        groups[i] = image_code.setdefault(img, len(image_code))
    labels = kernels.constrained_average_linkage(x, groups, stop_distance)
    parts: dict[int, list[str]] = {}
    for fid, label in zip(ordered, labels):
        parts.setdefault(int(label), []).append(fid)
    return [parts[label] for label in sorted(parts)]


def enforce_cooccurrence(
    clustering: Clustering, dataset: EventDataset, stop_distance: float
) -> Clustering:
    """Split every cluster holding two faces of one image.

    Offending clusters are rebuilt bottom-up: average-linkage agglomeration
    over their members that refuses any merge joining two same-image faces
    and stops once the closest legal pair is farther than ``stop_distance``.
    The resulting parts replace the original under fresh ids; clean clusters
    pass through untouched.
    """
    out: dict[str, frozenset[str] | list[str]] = {}
    for cid, members in clustering.clusters.items():
        images = [_image_of(dataset, f) for f in members]
        if len(set(images)) == len(images):
            out[cid] = members
            continue
        for k, part in enumerate(_split_cluster(dataset, sorted(members), stop_distance)):
            new_id = f"{cid}_{k}"
            while new_id in out or new_id in clustering.clusters:
                new_id += "x"
            out[new_id] = part
    return clustering.with_stage("cooccurrence", clusters=out)


def knn_assign(
    clustering: Clustering,
    dataset: EventDataset,
    k_nn: int = 5,
    votes_required: int = 4,
) -> Clustering:
    """Give unassigned faces the majority label of their nearest assigned faces.

    Voters are the faces assigned before this operation began; an unassigned
    face joins a cluster when at least ``votes_required`` of its ``k_nn``
    nearest voters share that cluster and the join puts no second face of
    any image into it.  Faces are processed nearest-first.
    """
    voters = sorted(clustering.assignment)
    pending = sorted(clustering.unassigned)
    if len(voters) < k_nn or not pending:
        return clustering.with_stage("knn_assign")

    voter_labels = [clustering.assignment[f] for f in voters]
    xv = dataset.embeddings_for(voters)
    xq = dataset.embeddings_for(pending)
    neighbor_idx = kernels.knn_indices(xq, xv, k_nn)
    sq = kernels.pairwise_sq_dists(xq, xv)

    order = sorted(
        range(len(pending)), key=lambda i: (float(sq[i, neighbor_idx[i, 0]]), pending[i])
    )

    clusters: dict[str, set[str]] = {cid: set(m) for cid, m in clustering.clusters.items()}
    images: dict[str, set[str]] = {
        cid: _images_of_members(dataset, m) for cid, m in clusters.items()
    }
    unassigned = set(clustering.unassigned)

    for i in order:
        face = pending[i]
        votes = Counter(voter_labels[int(j)] for j in neighbor_idx[i])
        label, count = min(votes.items(), key=lambda kv: (-kv[1], kv[0]))
        if count < votes_required:
            continue
        img = _image_of(dataset, face)
        if img in images[label]:
            log.debug("knn: %s not joining %s, would double-book an image", face, label)
            continue
        clusters[label].add(face)
        images[label].add(img)
        unassigned.discard(face)

    return clustering.with_stage("knn_assign", clusters=clusters, unassigned=unassigned)


def prune_low_quality_clusters(
    clustering: Clustering, dataset: EventDataset, threshold: float
) -> Clustering:
    """Dissolve clusters whose best member quality is below ``threshold``."""
    clusters: dict[str, frozenset[str]] = {}
    freed: set[str] = set()
    for cid, members in clustering.clusters.items():
        best = max(dataset.faces_by_id[f].quality_score for f in members)
        if best < threshold:
            freed |= members
        else:
            clusters[cid] = members
    return clustering.with_stage(
        "prune", clusters=clusters, unassigned=clustering.unassigned | freed
    )


def propagate_duplicate_labels(
    clustering: Clustering, duplicates: DuplicateMap, dataset: EventDataset
) -> Clustering:
    """Copy labels from representative-image faces onto their duplicate twins.

    Each sidelined duplicate face takes the cluster of the face it was
    matched against during deduplication; if that partner ended up anywhere
    but a cluster (rejected, unassigned, pruned), the duplicate face stays
    unassigned.  Faces the quality filter rejected stay rejected.
    """
    clusters: dict[str, set[str]] = {cid: set(m) for cid, m in clustering.clusters.items()}
    images: dict[str, set[str]] = {
        cid: _images_of_members(dataset, m) for cid, m in clusters.items()
    }
    assign = dict(clustering.assignment)
    unassigned = set(clustering.unassigned)

    for dup_face, rep_face in sorted(duplicates.face_map.items()):
        if dup_face not in unassigned:
            continue  # rejected by filtering, or already placed
        target = assign.get(rep_face)
        if target is None:
            continue
        img = _image_of(dataset, dup_face)
        if img in images[target]:
            log.debug(
                "propagate: %s not joining %s, would double-book image %s", dup_face, target, img
            )
            continue
        clusters[target].add(dup_face)
        images[target].add(img)
        assign[dup_face] = target
        unassigned.discard(dup_face)

    return clustering.with_stage(
        "propagate_duplicates", clusters=clusters, unassigned=unassigned
    )
