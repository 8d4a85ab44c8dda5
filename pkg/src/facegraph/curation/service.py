"""HTTP+JSON API over curation sessions.

Readers may hit the service concurrently; mutations serialize through a
per-session lock and optimistic concurrency: every response carries the
session's sequence number, and every action must quote the last one seen.
"""

from __future__ import annotations

import argparse
import threading
from collections import defaultdict

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from .. import io as fio
from ..errors import (
    CannotLinkError,
    CurationError,
    FaceGraphError,
    InvalidActionError,
    ParseError,
    StaleTargetError,
)
from .state import CurationAction, Session, SessionStore

DEFAULT_POTENTIAL_RADIUS = 75.0
DEFAULT_SIMILAR_TOP = 5
DEFAULT_FACE_THRESHOLD = 25.0


class OpenSessionBody(BaseModel):
    dataset: str
    clustering: str


class ActionBody(BaseModel):
    expected_seq: int
    kind: str
    cluster_id: str
    faces: list[str] = Field(default_factory=list)
    other: str | None = None


def create_app(
    store: SessionStore,
    *,
    potential_radius: float = DEFAULT_POTENTIAL_RADIUS,
) -> FastAPI:
    app = FastAPI(title="facegraph curation service")
    locks: dict[str, threading.Lock] = defaultdict(threading.Lock)

    def session_or_404(session_id: str) -> Session:
        try:
            return store.get(session_id)
        except (StaleTargetError, ParseError) as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    def face_view(session: Session, face_id: str, **extra) -> dict:
        face = session.state.dataset.faces_by_id[face_id]
        view = {
            "face_id": face.face_id,
            "image_id": face.image_id,
            "quality_score": face.quality_score,
        }
        view.update(extra)
        return view

    def cluster_mean(session: Session, members) -> np.ndarray:
        return session.state.dataset.embeddings_for(sorted(members)).mean(axis=0)

    @app.post("/sessions", status_code=201)
    def open_session(body: OpenSessionBody) -> dict:
        try:
            session = store.create(body.dataset, body.clustering)
        except (ParseError, FaceGraphError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {
            "session_id": session.session_id,
            "seq": session.state.seq,
            "n_clusters": len(session.state.clusters),
        }

    @app.get("/sessions/{session_id}/clusters")
    def list_clusters(session_id: str) -> dict:
        session = session_or_404(session_id)
        state = session.state
        by_id = state.dataset.faces_by_id
        clusters = [
            {
                "cluster_id": cid,
                "status": state.status[cid],
                "size": len(members),
                "best_quality": max(by_id[f].quality_score for f in members),
            }
            for cid, members in sorted(state.clusters.items())
        ]
        return {"seq": state.seq, "clusters": clusters}

    @app.get("/clusters/{cluster_id}")
    def get_cluster(cluster_id: str, session: str = Query(...)) -> dict:
        sess = session_or_404(session)
        state = sess.state
        try:
            members = state.live_cluster(cluster_id)
        except StaleTargetError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        by_id = state.dataset.faces_by_id
        ordered = sorted(members, key=lambda f: (-by_id[f].quality_score, f))

        potential: list[dict] = []
        if state.unassigned:
            mean = cluster_mean(sess, members)
            pool = sorted(state.unassigned)
            dists = np.sqrt(
                ((state.dataset.embeddings_for(pool) - mean) ** 2).sum(axis=1)
            )
            for fid, dist in sorted(
                zip(pool, dists), key=lambda t: (float(t[1]), t[0])
            ):
                if float(dist) <= potential_radius:
                    potential.append(face_view(sess, fid, distance=float(dist)))
        return {
            "seq": state.seq,
            "cluster_id": cluster_id,
            "status": state.status[cluster_id],
            "members": [face_view(sess, f) for f in ordered],
            "potential": potential,
        }

    @app.get("/clusters/{cluster_id}/similar")
    def similar_clusters(
        cluster_id: str,
        session: str = Query(...),
        top: int = Query(DEFAULT_SIMILAR_TOP, ge=1),
    ) -> dict:
        sess = session_or_404(session)
        state = sess.state
        try:
            members = state.live_cluster(cluster_id)
        except StaleTargetError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        by_id = state.dataset.faces_by_id
        target_mean = cluster_mean(sess, members)
        target_images = {by_id[f].image_id for f in members}

        ranked = []
        for cid, other in sorted(state.clusters.items()):
            if cid == cluster_id:
                continue
            dist = float(np.sqrt(((cluster_mean(sess, other) - target_mean) ** 2).sum()))
            conflict = any(by_id[f].image_id in target_images for f in other)
            ranked.append({"cluster_id": cid, "distance": dist, "conflict": conflict})
        ranked.sort(key=lambda c: (c["distance"], c["cluster_id"]))
        return {"seq": state.seq, "candidates": ranked[:top]}

    @app.post("/sessions/{session_id}/actions")
    def post_action(session_id: str, body: ActionBody) -> dict:
        session = session_or_404(session_id)
        with locks[session_id]:
            state = session.state
            if body.expected_seq != state.seq:
                raise HTTPException(
                    status_code=409,
                    detail=f"stale sequence number {body.expected_seq}, state is at {state.seq}",
                    headers={"X-Seq": str(state.seq)},
                )
            try:
                action = CurationAction(
                    kind=body.kind,
                    cluster_id=body.cluster_id,
                    faces=tuple(body.faces),
                    other=body.other,
                )
                applied = session.apply(action)
            except StaleTargetError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            except (CannotLinkError, InvalidActionError) as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            response = {"seq": state.seq, "applied": applied.to_dict()}
            if applied.kind == "split_faces":
                response["new_cluster_id"] = f"cur{applied.seq:05d}"
            return response

    @app.get("/faces/{face_id}/context")
    def face_context(face_id: str, session: str = Query(...)) -> dict:
        sess = session_or_404(session)
        state = sess.state
        face = state.dataset.faces_by_id.get(face_id)
        if face is None:
            raise HTTPException(status_code=404, detail=f"unknown face {face_id!r}")
        image = state.dataset.images_by_id[face.image_id]
        return {
            "seq": state.seq,
            "face_id": face_id,
            "image_id": image.image_id,
            "capture_time": image.capture_time,
            "siblings": [f for f in image.face_ids if f != face_id],
            "image_ref": f"image://{state.dataset.event_id}/{image.image_id}",
        }

    @app.get("/faces/{face_id}/similar")
    def similar_faces(
        face_id: str,
        session: str = Query(...),
        threshold: float = Query(DEFAULT_FACE_THRESHOLD, ge=0.0),
    ) -> dict:
        sess = session_or_404(session)
        state = sess.state
        face = state.dataset.faces_by_id.get(face_id)
        if face is None:
            raise HTTPException(status_code=404, detail=f"unknown face {face_id!r}")
        cluster_id = next(
            (cid for cid, members in state.clusters.items() if face_id in members), None
        )
        similar: list[str] = []
        if cluster_id is not None:
            others = sorted(f for f in state.clusters[cluster_id] if f != face_id)
            if others:
                dists = np.sqrt(
                    (
                        (state.dataset.embeddings_for(others) - face.embedding) ** 2
                    ).sum(axis=1)
                )
                similar = [
                    fid
                    for fid, dist in sorted(
                        zip(others, dists), key=lambda t: (float(t[1]), t[0])
                    )
                    if float(dist) <= threshold
                ]
        return {"seq": state.seq, "cluster_id": cluster_id, "faces": similar}

    @app.post("/sessions/{session_id}/export")
    def export_session(session_id: str) -> dict:
        session = session_or_404(session_id)
        with locks[session_id]:
            try:
                clustering, truth = session.state.export_curated()
            except CurationError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            return {
                "seq": session.state.seq,
                "clustering": fio.clustering_to_dict(clustering),
                "identities": {pid: sorted(fids) for pid, fids in sorted(truth.identities.items())},
            }

    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="facegraph-curate", description="Serve the cluster curation API."
    )
    parser.add_argument("--state-dir", default="curation-state", help="session storage directory")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8008)
    parser.add_argument("--dataset", help="open a session on this dataset at startup")
    parser.add_argument("--clustering", help="clustering file for the startup session")
    parser.add_argument(
        "--potential-radius",
        type=float,
        default=DEFAULT_POTENTIAL_RADIUS,
        help="distance cutoff for suggesting unassigned faces on cluster views",
    )
    args = parser.parse_args(argv)

    store = SessionStore(args.state_dir)
    if (args.dataset is None) != (args.clustering is None):
        parser.error("--dataset and --clustering must be given together")
    if args.dataset:
        session = store.create(args.dataset, args.clustering)
        print(f"opened session {session.session_id}")

    import uvicorn

    app = create_app(store, potential_radius=args.potential_radius)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
