"""Numeric kernels with a compiled fast path and a pure-numpy fallback.

The compiled extension is selected at import time when available; set
``FACEGRAPH_PURE_PYTHON=1`` to force the reference backend.  Both backends
implement identical arithmetic and tie-breaking, so results do not depend
on which one is active.
"""

from __future__ import annotations

import os

from . import reference

NOISE = reference.NOISE

if os.environ.get("FACEGRAPH_PURE_PYTHON"):
    _impl = reference
    BACKEND = "reference"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        _impl = reference
        BACKEND = "reference"

pairwise_sq_dists = _impl.pairwise_sq_dists
dbscan_labels = _impl.dbscan_labels
knn_indices = _impl.knn_indices
constrained_average_linkage = _impl.constrained_average_linkage

__all__ = [
    "BACKEND",
    "NOISE",
    "constrained_average_linkage",
    "dbscan_labels",
    "knn_indices",
    "pairwise_sq_dists",
    "reference",
]
