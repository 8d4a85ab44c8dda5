"""Co-occurrence graph over clusters: discovery, ranking, export."""

from __future__ import annotations

import dataclasses
import json
from collections.abc import Mapping
from functools import cached_property
from itertools import combinations

from .clustering import Clustering
from .errors import ConfigError, IntegrityError, ParseError
from .records import EventDataset

EXPORT_FORMATS = ("json-nodelink", "dot")


@dataclasses.dataclass(frozen=True, eq=False)
class SocialGraph:
    """Undirected graph whose nodes are clusters and whose edges carry evidence.

    An edge between two clusters exists when at least one image shows faces
    of both; the evidence set holds exactly those images, and the edge
    weight is its size.
    """

    nodes: frozenset[str]
    edges: Mapping[tuple[str, str], frozenset[str]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        normalized: dict[tuple[str, str], frozenset[str]] = {}
        for (a, b), evidence in self.edges.items():
            if a == b:
                raise IntegrityError(f"self-loop on {a!r}")
            if a not in self.nodes or b not in self.nodes:
                raise IntegrityError(f"edge ({a!r}, {b!r}) references unknown node")
            evidence = frozenset(evidence)
            if not evidence:
                raise IntegrityError(f"edge ({a!r}, {b!r}) has no evidence images")
            key = (a, b) if a < b else (b, a)
            if key in normalized and normalized[key] != evidence:
                raise IntegrityError(f"conflicting evidence for edge {key}")
            normalized[key] = evidence
        object.__setattr__(self, "edges", dict(sorted(normalized.items())))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SocialGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def weight(self, a: str, b: str) -> int:
        key = (a, b) if a < b else (b, a)
        return len(self.edges.get(key, ()))

    @cached_property
    def _degrees(self) -> Mapping[str, tuple[int, int]]:
        """node -> (degree, total incident weight)."""
        out = {n: [0, 0] for n in self.nodes}
        for (a, b), evidence in self.edges.items():
            for n in (a, b):
                out[n][0] += 1
                out[n][1] += len(evidence)
        return {n: (d, w) for n, (d, w) in out.items()}

    def degree(self, node: str) -> int:
        return self._degrees[node][0]

    def total_weight(self, node: str) -> int:
        return self._degrees[node][1]


def discover_graph(clustering: Clustering, dataset: EventDataset) -> SocialGraph:
    """Connect every pair of clusters that share at least one image."""
    assignment = clustering.assignment
    evidence: dict[tuple[str, str], set[str]] = {}
    for image in dataset.images:
        cids = sorted({assignment[f] for f in image.face_ids if f in assignment})
        for a, b in combinations(cids, 2):
            evidence.setdefault((a, b), set()).add(image.image_id)
    return SocialGraph(
        nodes=frozenset(clustering.clusters),
        edges={pair: frozenset(images) for pair, images in evidence.items()},
    )


def top_k_by_degree(graph: SocialGraph, k: int = 10) -> list[str]:
    """Most-connected nodes: degree desc, total weight desc, id asc."""
    if k < 1:
        raise ConfigError(f"k must be at least 1, got {k}")
    ranked = sorted(
        graph.nodes, key=lambda n: (-graph.degree(n), -graph.total_weight(n), n)
    )
    return ranked[:k]


def export_graph(graph: SocialGraph, format: str, *, min_weight: int = 1) -> str:
    """Serialize the graph; edges lighter than ``min_weight`` are dropped."""
    if format not in EXPORT_FORMATS:
        raise ConfigError(f"unknown graph format {format!r}; expected one of {EXPORT_FORMATS}")
    kept = {pair: ev for pair, ev in graph.edges.items() if len(ev) >= min_weight}
    if format == "json-nodelink":
        payload = {
            "nodes": [{"id": n} for n in sorted(graph.nodes)],
            "links": [
                {"source": a, "target": b, "weight": len(ev), "evidence": sorted(ev)}
                for (a, b), ev in sorted(kept.items())
            ],
        }
        return json.dumps(payload, indent=2) + "\n"
    lines = ["graph G {"]
    for n in sorted(graph.nodes):
        lines.append(f'  "{n}";')
    for (a, b), ev in sorted(kept.items()):
        lines.append(f'  "{a}" -- "{b}" [weight={len(ev)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_graph_json(text: str) -> SocialGraph:
    """Inverse of the json-nodelink export."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"graph json: {exc}") from exc
    try:
        nodes = frozenset(str(n["id"]) for n in obj["nodes"])
        edges = {
            (str(link["source"]), str(link["target"])): frozenset(
                str(i) for i in link["evidence"]
            )
            for link in obj["links"]
        }
    except (KeyError, TypeError) as exc:
        raise ParseError(f"graph json: malformed node-link structure ({exc})") from exc
    return SocialGraph(nodes=nodes, edges=edges)
