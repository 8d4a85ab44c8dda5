"""Reference kernel backend built on numpy/scipy.

The compiled backend (:mod:`facegraph.kernels._native`) implements the same
four kernels with identical arithmetic (same summation order, same
tie-breaking), so both backends produce bit-identical outputs.  Distances
are squared Euclidean throughout except for average-linkage merging, which
operates on plain Euclidean distance.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

NOISE = -1


def pairwise_sq_dists(x: np.ndarray, y: np.ndarray | None = None) -> np.ndarray:
    """Dense squared-Euclidean distance matrix between rows of x and y."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = x if y is None else np.ascontiguousarray(y, dtype=np.float64)
    return cdist(x, y, metric="sqeuclidean")


def dbscan_labels(x: np.ndarray, eps: float, min_samples: int) -> np.ndarray:
    """Density-based cluster labels; noise points get label -1.

    A point is core when at least ``min_samples`` points (itself included)
    lie within ``eps``.  Expansion visits points in ascending index order,
    so labels are a pure function of the input ordering.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    sq = pairwise_sq_dists(x)
    eps_sq = float(eps) * float(eps)
    within = sq <= eps_sq
    neighborhoods = [np.flatnonzero(within[i]) for i in range(n)]
    is_core = np.array([len(nb) >= min_samples for nb in neighborhoods])

    labels = np.full(n, NOISE, dtype=np.int64)
    label_num = 0
    stack: list[int] = []
    for start in range(n):
        if labels[start] != NOISE or not is_core[start]:
            continue
        i = start
        while True:
            if labels[i] == NOISE:
                labels[i] = label_num
                if is_core[i]:
                    for j in neighborhoods[i]:
                        if labels[j] == NOISE:
                            stack.append(int(j))
            if not stack:
                break
            i = stack.pop()
        label_num += 1
    return labels


def knn_indices(q: np.ndarray, r: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest rows of r for each row of q.

    Neighbors are ordered by (distance, reference index): equidistant
    neighbors resolve to the lower index, keeping results deterministic.
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    r = np.ascontiguousarray(r, dtype=np.float64)
    if k > r.shape[0]:
        raise ValueError(f"k={k} exceeds reference set size {r.shape[0]}")
    sq = pairwise_sq_dists(q, r)
    idx = np.arange(r.shape[0])
    out = np.empty((q.shape[0], k), dtype=np.int64)
    for i in range(q.shape[0]):
        order = np.lexsort((idx, sq[i]))
        out[i] = order[:k]
    return out


def constrained_average_linkage(
    x: np.ndarray, groups: np.ndarray, stop_distance: float
) -> np.ndarray:
    """Agglomerative average-linkage labels under a grouping constraint.

    Starts from singletons and repeatedly merges the pair of clusters with
    the smallest average inter-point Euclidean distance, skipping any pair
    whose member points share a group code (two faces from one image must
    never share a cluster).  Merging stops when no permitted pair has
    linkage distance <= ``stop_distance``.  Ties resolve to the pair that
    appears first in row-major order of original point indices.

    Returns integer labels numbered by first appearance in index order.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    groups = np.asarray(groups, dtype=np.int64)
    n = x.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)

    dist = np.sqrt(pairwise_sq_dists(x))
    conflict = groups[:, None] == groups[None, :]
    size = np.ones(n, dtype=np.float64)
    active = np.ones(n, dtype=bool)
    parent = np.arange(n, dtype=np.int64)

    big = np.inf
    # work[i, j] = linkage distance if the merge (i, j) is permitted, else inf
    work = np.where(conflict, big, dist)
    np.fill_diagonal(work, big)
    stop = float(stop_distance)

    for _ in range(n - 1):
        flat = np.argmin(work)
        i, j = divmod(int(flat), n)
        if not np.isfinite(work[i, j]) or work[i, j] > stop:
            break
        if i > j:
            i, j = j, i
        si, sj = size[i], size[j]
        merged_row = (si * dist[i] + sj * dist[j]) / (si + sj)
        dist[i, :] = merged_row
        dist[:, i] = merged_row
        conflict[i, :] |= conflict[j, :]
        conflict[:, i] = conflict[i, :]
        size[i] = si + sj
        active[j] = False
        parent[parent == j] = i

        row = np.where(conflict[i] | ~active, big, dist[i])
        row[i] = big
        work[i, :] = row
        work[:, i] = row
        work[j, :] = big
        work[:, j] = big

    labels = np.full(n, -1, dtype=np.int64)
    next_label = 0
    for p in range(n):
        root = parent[p]
        if labels[root] == -1:
            labels[root] = next_label
            next_label += 1
        labels[p] = labels[root]
    return labels
