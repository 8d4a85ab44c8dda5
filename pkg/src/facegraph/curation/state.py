"""Event-sourced curation state: an action log over a working clustering.

Every mutation is a validated CurationAction appended to a per-session log;
replaying the log over the initial clustering reproduces the working state
exactly.  Snapshots every ``SNAPSHOT_EVERY`` actions keep reopening cheap
without ever becoming the source of truth.
"""

from __future__ import annotations

import dataclasses
import json
import time
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path

from ..clustering import Clustering
from ..errors import (
    CannotLinkError,
    CurationError,
    InvalidActionError,
    ParseError,
    StaleTargetError,
)
from ..records import EventDataset, GroundTruth

ACTION_KINDS = (
    "confirm_cluster",
    "reject_cluster",
    "reject_faces",
    "split_faces",
    "merge_clusters",
)
PENDING = "pending"
CONFIRMED = "confirmed"
REJECTED = "rejected"
SNAPSHOT_EVERY = 50


@dataclasses.dataclass(frozen=True)
class CurationAction:
    """One human decision. ``seq`` is assigned by the state on success."""

    kind: str
    cluster_id: str
    faces: tuple[str, ...] = ()
    other: str | None = None
    seq: int = 0
    at: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ACTION_KINDS:
            raise InvalidActionError(
                f"unknown action kind {self.kind!r}; expected one of {ACTION_KINDS}"
            )
        object.__setattr__(self, "faces", tuple(str(f) for f in self.faces))

    def to_dict(self) -> dict:
        out = {"seq": self.seq, "kind": self.kind, "cluster_id": self.cluster_id, "at": self.at}
        if self.faces:
            out["faces"] = list(self.faces)
        if self.other is not None:
            out["other"] = self.other
        return out

    @classmethod
    def from_dict(cls, obj: Mapping) -> "CurationAction":
        return cls(
            kind=str(obj["kind"]),
            cluster_id=str(obj["cluster_id"]),
            faces=tuple(obj.get("faces", ())),
            other=obj.get("other"),
            seq=int(obj.get("seq", 0)),
            at=float(obj.get("at", 0.0)),
        )


class CurationState:
    """Mutable working clustering plus per-cluster review status."""

    def __init__(self, dataset: EventDataset, initial: Clustering) -> None:
        initial.validate_against(dataset)
        self.dataset = dataset
        self.initial = initial
        self.clusters: dict[str, set[str]] = {
            cid: set(members) for cid, members in initial.clusters.items()
        }
        self.unassigned: set[str] = set(initial.unassigned)
        self.rejected: set[str] = set(initial.rejected)
        self.status: dict[str, str] = {cid: PENDING for cid in self.clusters}
        self.log: list[CurationAction] = []
        self.seq = 0

    # -- queries ---------------------------------------------------------

    def live_cluster(self, cluster_id: str) -> set[str]:
        members = self.clusters.get(cluster_id)
        if members is None:
            if self.status.get(cluster_id) == REJECTED:
                raise StaleTargetError(f"cluster {cluster_id!r} was rejected")
            raise StaleTargetError(f"unknown cluster {cluster_id!r}")
        return members

    def _images_of(self, faces: Iterable[str]) -> list[str]:
        by_id = self.dataset.faces_by_id
        return [by_id[f].image_id for f in faces]

    def _find_double_booking(self, faces: Iterable[str]) -> str | None:
        seen: set[str] = set()
        for img in self._images_of(faces):
            if img in seen:
                return img
            seen.add(img)
        return None

    def as_clustering(self) -> Clustering:
        return Clustering(
            clusters={cid: frozenset(m) for cid, m in self.clusters.items()},
            unassigned=frozenset(self.unassigned),
            rejected=frozenset(self.rejected),
            provenance=self.initial.provenance + (f"curated:{self.seq}",),
        )

    # -- mutations -------------------------------------------------------

    def apply(self, action: CurationAction) -> CurationAction:
        """Validate and apply; returns the logged action with its seq filled in.

        Raises without touching state when the action is invalid; partial
        application never happens because all checks precede all writes.
        """
        handler = {
            "confirm_cluster": self._confirm_cluster,
            "reject_cluster": self._reject_cluster,
            "reject_faces": self._reject_faces,
            "split_faces": self._split_faces,
            "merge_clusters": self._merge_clusters,
        }[action.kind]
        next_seq = self.seq + 1
        stamped = dataclasses.replace(
            action, seq=next_seq, at=action.at if action.at else time.time()
        )
        handler(stamped)
        self.seq = next_seq
        self.log.append(stamped)
        return stamped

    def _confirm_cluster(self, action: CurationAction) -> None:
        members = self.live_cluster(action.cluster_id)
        img = self._find_double_booking(members)
        if img is not None:
            raise CannotLinkError(
                f"cannot confirm {action.cluster_id!r}: two of its faces are on image {img!r}"
            )
        self.status[action.cluster_id] = CONFIRMED

    def _reject_cluster(self, action: CurationAction) -> None:
        members = self.live_cluster(action.cluster_id)
        self.rejected |= members
        del self.clusters[action.cluster_id]
        self.status[action.cluster_id] = REJECTED

    def _reject_faces(self, action: CurationAction) -> None:
        members = self.live_cluster(action.cluster_id)
        faces = set(action.faces)
        if not faces:
            raise InvalidActionError("reject_faces requires at least one face")
        stray = faces - members
        if stray:
            raise StaleTargetError(
                f"faces {sorted(stray)[:3]} are not in cluster {action.cluster_id!r}"
            )
        members -= faces
        self.rejected |= faces
        if not members:
            del self.clusters[action.cluster_id]
            self.status[action.cluster_id] = REJECTED

    def _split_faces(self, action: CurationAction) -> None:
        members = self.live_cluster(action.cluster_id)
        faces = set(action.faces)
        if not faces:
            raise InvalidActionError("split_faces requires at least one face")
        stray = faces - members
        if stray:
            raise StaleTargetError(
                f"faces {sorted(stray)[:3]} are not in cluster {action.cluster_id!r}"
            )
        if faces == members:
            raise InvalidActionError(
                "split_faces payload must be a proper subset; use the whole cluster as-is"
            )
        new_id = f"cur{action.seq:05d}"
        if new_id in self.clusters or self.status.get(new_id) is not None:
            raise CurationError(f"split target id {new_id!r} already exists")
        members -= faces
        self.clusters[new_id] = faces
        self.status[new_id] = PENDING

    def _merge_clusters(self, action: CurationAction) -> None:
        if action.other is None:
            raise InvalidActionError("merge_clusters requires the absorbed cluster in 'other'")
        if action.other == action.cluster_id:
            raise InvalidActionError("cannot merge a cluster with itself")
        target = self.live_cluster(action.cluster_id)
        source = self.live_cluster(action.other)
        img = self._find_double_booking(list(target) + list(source))
        if img is not None:
            raise CannotLinkError(
                f"cannot merge {action.other!r} into {action.cluster_id!r}: "
                f"both hold a face of image {img!r}"
            )
        target |= source
        del self.clusters[action.other]
        self.status.pop(action.other, None)
        self.status[action.cluster_id] = PENDING

    # -- export ----------------------------------------------------------

    def export_curated(self) -> tuple[Clustering, GroundTruth]:
        confirmed = sorted(cid for cid, st in self.status.items() if st == CONFIRMED)
        confirmed = [cid for cid in confirmed if cid in self.clusters]
        if not confirmed:
            raise CurationError("nothing to export: no cluster is confirmed")
        clusters = {cid: frozenset(self.clusters[cid]) for cid in confirmed}
        exported_faces = frozenset().union(*clusters.values())
        leftover = (
            self.dataset.face_ids - exported_faces - frozenset(self.rejected)
        )
        clustering = Clustering(
            clusters=clusters,
            unassigned=leftover,
            rejected=frozenset(self.rejected),
            provenance=self.initial.provenance + (f"curated:{self.seq}", "export_confirmed"),
        )
        identities = {
            f"t{idx:04d}": frozenset(self.clusters[cid]) for idx, cid in enumerate(confirmed)
        }
        return clustering, GroundTruth(identities=identities)


def replay(
    dataset: EventDataset, initial: Clustering, actions: Sequence[CurationAction]
) -> CurationState:
    """Fold the action log over the initial clustering."""
    state = CurationState(dataset, initial)
    for action in actions:
        applied = state.apply(dataclasses.replace(action, seq=0))
        if action.seq and applied.seq != action.seq:
            raise CurationError(
                f"log corruption: replayed action got seq {applied.seq}, log says {action.seq}"
            )
    return state


def states_equal(a: CurationState, b: CurationState) -> bool:
    return (
        a.clusters == b.clusters
        and a.unassigned == b.unassigned
        and a.rejected == b.rejected
        and a.status == b.status
        and a.seq == b.seq
    )


class Session:
    """A persisted curation session: live state plus its on-disk log."""

    def __init__(self, session_id: str, root: Path, state: CurationState) -> None:
        self.session_id = session_id
        self.root = root
        self.state = state

    @property
    def log_path(self) -> Path:
        return self.root / "log.jsonl"

    @property
    def snapshot_path(self) -> Path:
        return self.root / "snapshot.json"

    def apply(self, action: CurationAction) -> CurationAction:
        applied = self.state.apply(action)
        with self.log_path.open("a") as fh:
            fh.write(json.dumps(applied.to_dict()) + "\n")
        if applied.seq % SNAPSHOT_EVERY == 0:
            self._write_snapshot()
        return applied

    def _write_snapshot(self) -> None:
        state = self.state
        payload = {
            "seq": state.seq,
            "clusters": {cid: sorted(m) for cid, m in sorted(state.clusters.items())},
            "unassigned": sorted(state.unassigned),
            "rejected": sorted(state.rejected),
            "status": dict(sorted(state.status.items())),
        }
        self.snapshot_path.write_text(json.dumps(payload, indent=2) + "\n")


class SessionStore:
    """Creates and reopens sessions under one state directory."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._open: dict[str, Session] = {}

    def create(self, dataset_path: str | Path, clustering_path: str | Path) -> Session:
        from .. import io as fio

        dataset = fio.load_dataset(dataset_path)
        clustering = fio.load_clustering(clustering_path)
        existing = [p.name for p in self.root.iterdir() if p.is_dir()]
        session_id = f"s{len(existing) + 1:04d}"
        root = self.root / session_id
        root.mkdir()
        meta = {"dataset": str(dataset_path), "clustering": str(clustering_path)}
        (root / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
        session = Session(session_id, root, CurationState(dataset, clustering))
        self._open[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        if session_id in self._open:
            return self._open[session_id]
        return self.reopen(session_id)

    def reopen(self, session_id: str) -> Session:
        from .. import io as fio

        root = self.root / session_id
        meta_path = root / "meta.json"
        if not meta_path.is_file():
            raise StaleTargetError(f"unknown session {session_id!r}")
        meta = json.loads(meta_path.read_text())
        dataset = fio.load_dataset(meta["dataset"])
        clustering = fio.load_clustering(meta["clustering"])

        actions = []
        log_path = root / "log.jsonl"
        if log_path.is_file():
            with log_path.open() as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        actions.append(CurationAction.from_dict(json.loads(line)))
                    except (json.JSONDecodeError, KeyError) as exc:
                        raise ParseError(f"{log_path}:{lineno}: {exc}") from exc
        state = replay(dataset, clustering, actions)
        session = Session(session_id, root, state)
        self._open[session_id] = session
        return session
