# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Mirrors facegraph.kernels.reference operation for operation: identical
summation order, identical tie-breaking, identical merge bookkeeping.  The
two backends must stay bit-for-bit interchangeable; any behavioural change
here has to land in the reference implementation as well.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()

NOISE = -1


def pairwise_sq_dists(x, y=None):
    """Dense squared-Euclidean distance matrix between rows of x and y."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ya
    if y is None:
        ya = xa
    else:
        ya = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = xa.shape[0], m = ya.shape[0], d = xa.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] xv = xa, yv = ya, ov = out
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0.0
                for k in range(d):
                    diff = xv[i, k] - yv[j, k]
                    acc += diff * diff
                ov[i, j] = acc
    return out


def dbscan_labels(x, eps, min_samples):
    """Density-based cluster labels; noise points get label -1."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] sq = pairwise_sq_dists(x)
    cdef Py_ssize_t n = sq.shape[0]
    cdef double eps_sq = float(eps) * float(eps)
    cdef long min_n = int(min_samples)

    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(n, dtype=np.int64)
    cdef double[:, ::1] sv = sq
    cdef long[:] cv = counts
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(n):
                if sv[i, j] <= eps_sq:
                    cv[i] += 1

    # flat adjacency: neighbor indices of point i live in adj[off[i]:off[i+1]]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] off = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=off[1:])
    cdef cnp.ndarray[cnp.int64_t, ndim=1] adj = np.empty(off[n], dtype=np.int64)
    cdef long[:] offv = off, adjv = adj
    cdef Py_ssize_t pos
    with nogil:
        for i in range(n):
            pos = offv[i]
            for j in range(n):
                if sv[i, j] <= eps_sq:
                    adjv[pos] = j
                    pos += 1

    cdef cnp.ndarray[cnp.int64_t, ndim=1] labels = np.full(n, -1, dtype=np.int64)
    # a point may be pushed once per adjacency entry before it is first
    # popped, so the stack needs adjacency capacity, not just n
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack = np.empty(max(off[n], 1), dtype=np.int64)
    cdef long[:] lv = labels, stv = stack
    cdef Py_ssize_t top, start, v
    cdef long label_num = 0
    with nogil:
        for start in range(n):
            if lv[start] != -1 or cv[start] < min_n:
                continue
            top = 0
            i = start
            while True:
                if lv[i] == -1:
                    lv[i] = label_num
                    if cv[i] >= min_n:
                        for pos in range(offv[i], offv[i + 1]):
                            v = adjv[pos]
                            if lv[v] == -1:
                                stv[top] = v
                                top += 1
                if top == 0:
                    break
                top -= 1
                i = stv[top]
            label_num += 1
    return labels


def knn_indices(q, r, k):
    """Indices of the k nearest rows of r per query row, ties to lower index."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] sq = pairwise_sq_dists(q, r)
    cdef Py_ssize_t nq = sq.shape[0], m = sq.shape[1]
    cdef long kk = int(k)
    if kk > m:
        raise ValueError(f"k={kk} exceeds reference set size {m}")
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.empty((nq, kk), dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] taken = np.zeros(m, dtype=np.uint8)
    cdef double[:, ::1] sv = sq
    cdef long[:, ::1] ov = out
    cdef cnp.uint8_t[:] tv = taken
    cdef Py_ssize_t i, j, slot, best
    cdef double best_d
    with nogil:
        for i in range(nq):
            for j in range(m):
                tv[j] = 0
            for slot in range(kk):
                best = -1
                best_d = INFINITY
                for j in range(m):
                    if tv[j] == 0 and sv[i, j] < best_d:
                        best_d = sv[i, j]
                        best = j
                ov[i, slot] = best
                tv[best] = 1
    return out


def constrained_average_linkage(x, groups, stop_distance):
    """Agglomerative average-linkage labels under a grouping constraint.

    Same contract and traversal order as the reference backend: merge the
    first (row-major) minimum-linkage pair whose members share no group
    code, stop when no permitted pair has linkage <= stop_distance.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dist = pairwise_sq_dists(x)
    cdef Py_ssize_t n = dist.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    np.sqrt(dist, out=dist)

    cdef cnp.ndarray[cnp.int64_t, ndim=1] garr = np.ascontiguousarray(groups, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] conflict = np.empty((n, n), dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] size = np.ones(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] active = np.ones(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] parent = np.arange(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(n, dtype=np.float64)

    cdef double[:, ::1] dv = dist
    cdef cnp.uint8_t[:, ::1] cf = conflict
    cdef double[:] sz = size, scr = scratch
    cdef cnp.uint8_t[:] av = active
    cdef long[:] pv = parent, gv = garr
    cdef double stop = float(stop_distance)
    cdef Py_ssize_t i, j, c, bi, bj, it
    cdef double best, si, sj

    with nogil:
        for i in range(n):
            for j in range(n):
                cf[i, j] = 1 if gv[i] == gv[j] else 0

        for it in range(n - 1):
            best = INFINITY
            bi = -1
            bj = -1
            for i in range(n):
                if av[i] == 0:
                    continue
                for j in range(i + 1, n):
                    if av[j] == 0 or cf[i, j] != 0:
                        continue
                    if dv[i, j] < best:
                        best = dv[i, j]
                        bi = i
                        bj = j
            if bi < 0 or best > stop:
                break
            i = bi
            j = bj
            si = sz[i]
            sj = sz[j]
            for c in range(n):
                scr[c] = (si * dv[i, c] + sj * dv[j, c]) / (si + sj)
            for c in range(n):
                dv[i, c] = scr[c]
                dv[c, i] = scr[c]
            for c in range(n):
                if cf[j, c] != 0:
                    cf[i, c] = 1
                cf[c, i] = cf[i, c]
            sz[i] = si + sj
            av[j] = 0
            for c in range(n):
                if pv[c] == j:
                    pv[c] = i

    cdef cnp.ndarray[cnp.int64_t, ndim=1] labels = np.full(n, -1, dtype=np.int64)
    cdef long[:] lv = labels
    cdef long next_label = 0
    cdef Py_ssize_t p, root
    for p in range(n):
        root = pv[p]
        if lv[root] == -1:
            lv[root] = next_label
            next_label += 1
        lv[p] = lv[root]
    return labels
