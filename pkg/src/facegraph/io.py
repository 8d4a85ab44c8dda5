"""On-disk formats: datasets, ground truth, clusterings, graphs, reports.

A dataset lives in a directory holding ``manifest.json`` (event metadata and
images) and ``faces.jsonl`` (one face per line).  Floats are written with 17
significant digits so that every artifact round-trips bit-exactly.
"""

from __future__ import annotations

import json
import sys
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from .clustering import Clustering
from .errors import ParseError
from .records import EventDataset, FaceRecord, GroundTruth, ImageRecord, PlantedGraph

MANIFEST_NAME = "manifest.json"
FACES_NAME = "faces.jsonl"

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml


def fmt_float(value: float) -> str:
    """Shortest decimal with enough digits to reproduce the exact float64."""
    return format(float(value), ".17g")


def load_toml(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return _toml.load(fh)
    except FileNotFoundError:
        raise ParseError(f"config file not found: {path}") from None
    except _toml.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _require(obj: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in obj:
        raise ParseError(f"{where}: missing required key {key!r}")
    return obj[key]


def load_dataset(path: str | Path) -> EventDataset:
    root = Path(path)
    manifest_path = root / MANIFEST_NAME
    faces_path = root / FACES_NAME
    for p in (manifest_path, faces_path):
        if not p.is_file():
            raise ParseError(f"dataset file not found: {p}")

    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{manifest_path}: {exc}") from exc
    if not isinstance(manifest, dict):
        raise ParseError(f"{manifest_path}: top level must be an object")

    event_id = str(_require(manifest, "event_id", str(manifest_path)))
    dimension = int(_require(manifest, "dimension", str(manifest_path)))
    images = []
    for idx, entry in enumerate(_require(manifest, "images", str(manifest_path))):
        where = f"{manifest_path}: images[{idx}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected an object")
        images.append(
            ImageRecord(
                image_id=str(_require(entry, "image_id", where)),
                capture_time=int(_require(entry, "capture_time", where)),
                face_ids=tuple(str(f) for f in _require(entry, "face_ids", where)),
            )
        )

    faces = []
    with faces_path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{faces_path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{where}: {exc}") from exc
            if not isinstance(obj, dict):
                raise ParseError(f"{where}: expected an object")
            gt = obj.get("ground_truth_id")
            faces.append(
                FaceRecord(
                    face_id=str(_require(obj, "face_id", where)),
                    image_id=str(_require(obj, "image_id", where)),
                    embedding=_require(obj, "embedding", where),
                    quality_score=float(_require(obj, "quality_score", where)),
                    ground_truth_id=None if gt is None else str(gt),
                )
            )

    return EventDataset(
        event_id=event_id, dimension=dimension, images=tuple(images), faces=tuple(faces)
    )


def save_dataset(dataset: EventDataset, path: str | Path) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    manifest = {
        "event_id": dataset.event_id,
        "dimension": dataset.dimension,
        "images": [
            {
                "image_id": img.image_id,
                "capture_time": img.capture_time,
                "face_ids": list(img.face_ids),
            }
            for img in dataset.images
        ],
    }
    (root / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2) + "\n")

    lines = []
    for face in dataset.faces:
        emb = ", ".join(fmt_float(v) for v in face.embedding)
        parts = [
            f'"face_id": {json.dumps(face.face_id)}',
            f'"image_id": {json.dumps(face.image_id)}',
            f'"quality_score": {fmt_float(face.quality_score)}',
            f'"embedding": [{emb}]',
        ]
        if face.ground_truth_id is not None:
            parts.append(f'"ground_truth_id": {json.dumps(face.ground_truth_id)}')
        lines.append("{" + ", ".join(parts) + "}")
    (root / FACES_NAME).write_text("\n".join(lines) + ("\n" if lines else ""))


def load_ground_truth(path: str | Path) -> GroundTruth:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except FileNotFoundError:
        raise ParseError(f"ground truth file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected an object mapping participant to faces")
    return GroundTruth(
        identities={str(pid): frozenset(str(f) for f in fids) for pid, fids in obj.items()}
    )


def save_ground_truth(truth: GroundTruth, path: str | Path) -> None:
    payload = {pid: sorted(fids) for pid, fids in sorted(truth.identities.items())}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_planted_graph(path: str | Path) -> PlantedGraph:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except FileNotFoundError:
        raise ParseError(f"planted graph file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    nodes = frozenset(str(n) for n in _require(obj, "nodes", str(path)))
    edges = {}
    for idx, e in enumerate(_require(obj, "edges", str(path))):
        where = f"{path}: edges[{idx}]"
        pair = (str(_require(e, "source", where)), str(_require(e, "target", where)))
        edges[pair] = int(_require(e, "weight", where))
    return PlantedGraph(nodes=nodes, edges=edges)


def save_planted_graph(graph: PlantedGraph, path: str | Path) -> None:
    payload = {
        "nodes": sorted(graph.nodes),
        "edges": [
            {"source": a, "target": b, "weight": w}
            for (a, b), w in sorted(graph.edges.items())
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def clustering_to_dict(clustering: Clustering) -> dict[str, Any]:
    return {
        "clusters": {cid: sorted(members) for cid, members in sorted(clustering.clusters.items())},
        "unassigned": sorted(clustering.unassigned),
        "rejected": sorted(clustering.rejected),
        "provenance": list(clustering.provenance),
    }


def clustering_from_dict(obj: Mapping[str, Any], where: str = "clustering") -> Clustering:
    if not isinstance(obj, Mapping):
        raise ParseError(f"{where}: expected an object")
    clusters = _require(obj, "clusters", where)
    if not isinstance(clusters, Mapping):
        raise ParseError(f"{where}: 'clusters' must map cluster id to face list")
    return Clustering(
        clusters={str(cid): frozenset(str(f) for f in members) for cid, members in clusters.items()},
        unassigned=frozenset(str(f) for f in obj.get("unassigned", ())),
        rejected=frozenset(str(f) for f in obj.get("rejected", ())),
        provenance=tuple(str(p) for p in obj.get("provenance", ())),
    )


def load_clustering(path: str | Path) -> Clustering:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except FileNotFoundError:
        raise ParseError(f"clustering file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return clustering_from_dict(obj, where=str(path))


def save_clustering(clustering: Clustering, path: str | Path) -> None:
    Path(path).write_text(json.dumps(clustering_to_dict(clustering), indent=2) + "\n")
