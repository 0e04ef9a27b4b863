"""HTTP curation service: read topic snapshots, apply curation ops with
optimistic versioning, and persist a write-ahead op log for crash recovery."""

from __future__ import annotations

import json
import logging
import os
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import model as model_mod
from .errors import (
    InsufficientData,
    NothingToUndo,
    OverlappingGroups,
    TopicforgeError,
    UnknownTopicId,
    VersionConflict,
)
from .evaluate import match_topics

log = logging.getLogger(__name__)


class OpBody(BaseModel):
    kind: str
    payload: dict = Field(default_factory=dict)
    actor: str = "expert"


class CurationRequest(BaseModel):
    expected_version: int
    op: OpBody


class UndoRequest(BaseModel):
    expected_version: int
    actor: str = "expert"


class SessionState:
    """One loaded model, one writer at a time, write-ahead persisted ops."""

    def __init__(self, model_path: str | Path, wal_path: str | Path | None = None,
                 coherence_metric: str | None = "c_v"):
        self.model_path = Path(model_path)
        self.wal_path = Path(wal_path) if wal_path else self.model_path.with_suffix(".ops.jsonl")
        self.lock = threading.Lock()
        model = model_mod.TopicModel.load(self.model_path)
        if coherence_metric is not None and model.coherence_metric is None:
            model = model_mod.TopicModel(
                **{**model_mod._base_kwargs(model), "coherence_metric": coherence_metric})
        self.model = self._replay_wal(model)

    def _replay_wal(self, model: model_mod.TopicModel) -> model_mod.TopicModel:
        if not self.wal_path.exists():
            return model
        for lineno, line in enumerate(self.wal_path.read_text("utf-8").splitlines(), 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            model = model_mod.apply_op(model, model_mod.CurationOp(**rec))
        return model

    def _persist(self, op: model_mod.CurationOp) -> None:
        with open(self.wal_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({
                "kind": op.kind, "payload": op.payload,
                "actor": op.actor, "timestamp": op.timestamp,
            }, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def apply(self, op: model_mod.CurationOp, expected_version: int) -> model_mod.TopicModel:
        with self.lock:
            if expected_version != self.model.version:
                raise VersionConflictError(self.model.version)
            # validate by building the new snapshot first; persist only on success
            new_model = model_mod.apply_op(self.model, op)
            self._persist(new_model.curation_log[-1])
            self.model = new_model
            return new_model


class VersionConflictError(VersionConflict):
    def __init__(self, current_version: int):
        super().__init__(f"version conflict: current version is {current_version}")
        self.current_version = current_version


def snapshot_summary(model: model_mod.TopicModel) -> dict:
    coherence = None
    if model.coherence is not None:
        coherence = {
            "metric": model.coherence.metric,
            "mean": model.coherence.mean,
            "per_topic": {str(t): s for t, s in
                          zip(model.coherence.topic_ids, model.coherence.per_topic)},
        }
    return {
        "version": model.version,
        "model_id": model.model_id,
        "corpus_id": model.corpus_id,
        "n_docs": model.n_docs,
        "coherence": coherence,
        "topics": [
            {"topic_id": t.topic_id, "size": t.size, "label": t.label,
             "is_other": t.is_other, "keywords": [[w, s] for w, s in t.keywords]}
            for t in model.topics
        ],
    }


def create_app(model_path: str | Path, wal_path: str | Path | None = None,
               static_dir: str | Path | None = None,
               compare_path: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="topicforge curation service")
    state = SessionState(model_path, wal_path)
    app.state.session = state

    def _versioned(payload: dict) -> dict:
        payload.setdefault("version", state.model.version)
        return payload

    @app.get("/api/model")
    def get_model():
        return snapshot_summary(state.model)

    @app.get("/api/topics/{topic_id}/documents")
    def get_topic_documents(topic_id: int, limit: int = Query(4, ge=1, le=100)):
        try:
            docs = state.model.topic_documents(topic_id, limit)
        except UnknownTopicId as exc:
            raise HTTPException(404, str(exc))
        return _versioned({"topic_id": topic_id, "documents": docs})

    @app.get("/api/hierarchy")
    def get_hierarchy():
        try:
            hierarchy = model_mod.topic_hierarchy(state.model)
        except InsufficientData as exc:
            raise HTTPException(422, str(exc))
        return _versioned({
            "leaves": list(hierarchy.leaves),
            "nodes": [{"left": n.left, "right": n.right, "distance": n.distance,
                       "leaf_topic_ids": list(n.leaf_topic_ids)}
                      for n in hierarchy.nodes],
        })

    @app.get("/api/distance-map")
    def get_distance_map():
        try:
            entries = model_mod.distance_map(state.model)
        except InsufficientData as exc:
            raise HTTPException(422, str(exc))
        return _versioned({"entries": [
            {"topic_id": e.topic_id, "x": e.x, "y": e.y, "size": e.size,
             "label": e.label} for e in entries
        ]})

    @app.get("/api/matches")
    def get_matches(other: str | None = None, lo: float = 0.9, hi: float = 1.0):
        other_path = other or (str(compare_path) if compare_path else None)
        if not other_path:
            raise HTTPException(422, "no comparison model configured")
        try:
            other_model = model_mod.TopicModel.load(other_path)
            report = match_topics(state.model, other_model, (lo, hi))
        except FileNotFoundError as exc:
            raise HTTPException(404, str(exc))
        except TopicforgeError as exc:
            raise HTTPException(422, str(exc))
        return _versioned({
            "band": [lo, hi],
            "pairs": [[a, b, c] for a, b, c in report.pairs],
            "matched": [[a, b, c] for a, b, c in report.matched],
        })

    def _apply(op: model_mod.CurationOp, expected_version: int) -> JSONResponse:
        try:
            new_model = state.apply(op, expected_version)
        except VersionConflictError as exc:
            return JSONResponse(
                status_code=409,
                content={"error": str(exc), "version": exc.current_version},
            )
        except (UnknownTopicId, OverlappingGroups, NothingToUndo, ValueError) as exc:
            raise HTTPException(422, str(exc))
        return JSONResponse(content=snapshot_summary(new_model))

    @app.post("/api/curation")
    def post_curation(req: CurationRequest):
        op = model_mod.CurationOp(
            kind=req.op.kind, payload=req.op.payload, actor=req.op.actor,
            timestamp=model_mod.CurationOp.now(),
        )
        return _apply(op, req.expected_version)

    @app.post("/api/undo")
    def post_undo(req: UndoRequest):
        op = model_mod.CurationOp(
            kind="undo", payload={}, actor=req.actor,
            timestamp=model_mod.CurationOp.now(),
        )
        return _apply(op, req.expected_version)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    return app
