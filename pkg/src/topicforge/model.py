"""TopicModel assembly and the expert curation loop: merge, rename,
mark-other, undo, topic hierarchy, and the intertopic distance map.

A model is an immutable snapshot. Every curation op appends to the log and
the current state is always the deterministic replay of that log from the
version-0 partition, so persisted models reproduce bit-exactly.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .density import ClusterLabeling
from .embedding import EmbeddingMatrix
from .errors import (
    DimensionMismatch,
    InsufficientData,
    NothingToUndo,
    OverlappingGroups,
    UnknownTopicId,
)
from .evaluate import model_coherence
from .ingest import Document
from .manifold import pca_reduce
from .represent import (
    CtfidfMatrix,
    LlmConfig,
    Topic,
    Vocabulary,
    ctfidf,
    fallback_label,
    llm_label,
    mmr_select,
    representative_documents,
    tokenize_count,
    top_terms,
    topic_centroid,
)

SCHEMA_VERSION = 1
OTHERS_ID = -1
MMR_CANDIDATES = 20


@dataclass(frozen=True)
class CurationOp:
    kind: str  # merge | rename | mark_other | undo
    payload: dict
    actor: str = "expert"
    timestamp: str = ""

    @staticmethod
    def now() -> str:
        return dt.datetime.now(dt.timezone.utc).isoformat()


@dataclass(frozen=True)
class HierarchyNode:
    left: int  # node index; < K means leaf (index into topic order)
    right: int
    distance: float
    leaf_topic_ids: tuple[int, ...]


@dataclass(frozen=True)
class TopicHierarchy:
    leaves: tuple[int, ...]  # topic ids, ascending
    nodes: tuple[HierarchyNode, ...]  # K-1 merges, distances non-decreasing


@dataclass(frozen=True)
class DistanceMapEntry:
    topic_id: int
    x: float
    y: float
    size: int
    label: str


class TopicModel:
    """Snapshot of a curated topic model over a fixed document set."""

    def __init__(self, *, model_id, corpus_id, doc_ids, doc_texts, embeddings,
                 provider_tag, base_assignments, base_labels, curation_log,
                 mmr_lambda=0.9, top_k=10, coherence_metric=None):
        self.model_id = model_id
        self.corpus_id = corpus_id
        self.doc_ids = list(doc_ids)
        self.doc_texts = list(doc_texts)
        self.embeddings = np.asarray(embeddings, dtype=np.float64)
        self.provider_tag = provider_tag
        self.base_assignments = np.asarray(base_assignments, dtype=np.int64)
        self.base_labels = dict(base_labels)  # topic_id -> label at version 0
        self.curation_log: list[CurationOp] = list(curation_log)
        self.mmr_lambda = mmr_lambda
        self.top_k = top_k
        self.coherence_metric = coherence_metric
        if len(self.doc_ids) != len(self.doc_texts):
            raise DimensionMismatch("doc ids and texts differ in length")
        if self.embeddings.shape[0] != len(self.doc_ids):
            raise DimensionMismatch("embedding rows do not match document count")
        if self.base_assignments.shape[0] != len(self.doc_ids):
            raise DimensionMismatch("assignments do not match document count")
        self._derive()

    # ---- state derivation -------------------------------------------------

    @property
    def version(self) -> int:
        return len(self.curation_log)

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    def _effective_ops(self) -> list[CurationOp]:
        effective: list[CurationOp] = []
        for op in self.curation_log:
            if op.kind == "undo":
                effective.pop()
            else:
                effective.append(op)
        return effective

    def _derive(self) -> None:
        assignments = self.base_assignments.copy()
        label_overrides: dict[int, str] = {}
        recomputed: set[int] = set()  # topics whose membership changed
        for op in self._effective_ops():
            if op.kind == "merge":
                for group in op.payload["groups"]:
                    target = min(group)
                    mask = np.isin(assignments, list(group))
                    assignments[mask] = target
                    recomputed.add(target)
            elif op.kind == "mark_other":
                ids = op.payload["topic_ids"]
                assignments[np.isin(assignments, list(ids))] = OTHERS_ID
            elif op.kind == "rename":
                label_overrides[op.payload["topic_id"]] = op.payload["label"]
        self.assignments = assignments
        self._label_overrides = label_overrides
        self._recomputed = recomputed
        self._build_topics()

    def _partition(self) -> dict[int, list[int]]:
        by_id: dict[int, list[int]] = {}
        for i, a in enumerate(self.assignments):
            by_id.setdefault(int(a), []).append(i)
        return by_id

    def _build_topics(self) -> None:
        by_id = self._partition()
        class_docs = {cid: [self.doc_texts[i] for i in idxs] for cid, idxs in by_id.items()}
        self.vocabulary: Vocabulary | None = None
        self.ctfidf_matrix: CtfidfMatrix | None = None
        keyword_table: dict[int, list[tuple[str, float]]] = {cid: [] for cid in by_id}
        try:
            vocab, counts, class_ids = tokenize_count(class_docs)
            matrix = ctfidf(counts, class_ids)
            self.vocabulary = vocab
            self.ctfidf_matrix = matrix
            for row, cid in enumerate(class_ids):
                candidates = top_terms(matrix, vocab, row, k=MMR_CANDIDATES)
                keyword_table[cid] = mmr_select(candidates, lam=self.mmr_lambda, k=self.top_k)
        except Exception:
            # tiny degenerate corpora can have no repeated term; topics then
            # carry empty keyword lists
            pass
        topics: list[Topic] = []
        ordered = sorted(by_id, key=lambda c: (c == OTHERS_ID, c))
        for cid in ordered:
            idxs = by_id[cid]
            centroid = topic_centroid(self.embeddings[idxs])
            keywords = keyword_table.get(cid, [])
            if cid in self._label_overrides:
                label = self._label_overrides[cid]
            elif cid == OTHERS_ID:
                label = "Others"
            elif cid in self.base_labels and cid not in self._recomputed:
                label = self.base_labels[cid]
            else:
                label = fallback_label([w for w, _ in keywords]) or f"topic {cid}"
            topics.append(Topic(
                topic_id=cid,
                size=len(idxs),
                keywords=keywords,
                label=label,
                centroid=centroid,
                is_other=(cid == OTHERS_ID),
            ))
        self.topics = topics
        self.coherence = None
        if self.coherence_metric is not None and any(not t.is_other for t in topics):
            try:
                self.coherence = model_coherence(self, self.doc_texts, self.coherence_metric)
            except Exception:
                self.coherence = None

    # ---- lookups ----------------------------------------------------------

    def topic(self, topic_id: int) -> Topic:
        for t in self.topics:
            if t.topic_id == topic_id:
                return t
        raise UnknownTopicId(f"no topic with id {topic_id}")

    def topic_ids(self, include_other: bool = True) -> list[int]:
        return [t.topic_id for t in self.topics if include_other or not t.is_other]

    def topic_documents(self, topic_id: int, limit: int = 4) -> list[str]:
        """Representative documents by centroid proximity."""
        topic = self.topic(topic_id)
        idxs = [i for i, a in enumerate(self.assignments) if a == topic_id]
        texts = [self.doc_texts[i] for i in idxs]
        return representative_documents(texts, self.embeddings[idxs], topic.centroid, limit)

    def _with_log(self, log: list[CurationOp]) -> "TopicModel":
        return TopicModel(
            model_id=self.model_id,
            corpus_id=self.corpus_id,
            doc_ids=self.doc_ids,
            doc_texts=self.doc_texts,
            embeddings=self.embeddings,
            provider_tag=self.provider_tag,
            base_assignments=self.base_assignments,
            base_labels=self.base_labels,
            curation_log=log,
            mmr_lambda=self.mmr_lambda,
            top_k=self.top_k,
            coherence_metric=self.coherence_metric,
        )

    # ---- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "model_id": self.model_id,
            "corpus_id": self.corpus_id,
            "provider_tag": self.provider_tag,
            "doc_ids": self.doc_ids,
            "doc_texts": self.doc_texts,
            "embeddings": [[float(x) for x in row] for row in self.embeddings],
            "base_assignments": [int(a) for a in self.base_assignments],
            "base_labels": {str(k): v for k, v in self.base_labels.items()},
            "curation_log": [
                {"kind": op.kind, "payload": op.payload, "actor": op.actor,
                 "timestamp": op.timestamp}
                for op in self.curation_log
            ],
            "mmr_lambda": self.mmr_lambda,
            "top_k": self.top_k,
            "coherence_metric": self.coherence_metric,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TopicModel":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise DimensionMismatch(
                f"unsupported model schema {data.get('schema_version')!r}")
        return cls(
            model_id=data["model_id"],
            corpus_id=data["corpus_id"],
            doc_ids=data["doc_ids"],
            doc_texts=data["doc_texts"],
            embeddings=np.asarray(data["embeddings"], dtype=np.float64),
            provider_tag=data["provider_tag"],
            base_assignments=data["base_assignments"],
            base_labels={int(k): v for k, v in data["base_labels"].items()},
            curation_log=[CurationOp(**op) for op in data["curation_log"]],
            mmr_lambda=data.get("mmr_lambda", 0.9),
            top_k=data.get("top_k", 10),
            coherence_metric=data.get("coherence_metric"),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True), "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TopicModel":
        return cls.from_dict(json.loads(Path(path).read_text("utf-8")))


# ---- construction ---------------------------------------------------------


def assemble_model(
    documents: list[Document],
    embeddings: EmbeddingMatrix,
    labeling: ClusterLabeling,
    *,
    model_id: str | None = None,
    llm_config: LlmConfig | None = None,
    mmr_lambda: float = 0.9,
    top_k: int = 10,
    coherence_metric: str | None = None,
) -> TopicModel:
    """Version-0 model; noise documents become the "Others" topic (id -1)."""
    if len(documents) != labeling.labels.shape[0]:
        raise DimensionMismatch(
            f"{len(documents)} documents vs {labeling.labels.shape[0]} labels")
    if embeddings.n_docs != len(documents):
        raise DimensionMismatch(
            f"{len(documents)} documents vs {embeddings.n_docs} embedding rows")
    corpus_id = documents[0].corpus_id if documents else "corpus"
    model = TopicModel(
        model_id=model_id or f"{corpus_id}-model",
        corpus_id=corpus_id,
        doc_ids=[d.doc_id for d in documents],
        doc_texts=[d.text for d in documents],
        embeddings=embeddings.data,
        provider_tag=embeddings.provider_tag,
        base_assignments=labeling.labels,
        base_labels={},
        curation_log=[],
        mmr_lambda=mmr_lambda,
        top_k=top_k,
        coherence_metric=coherence_metric,
    )
    if llm_config is not None and llm_config.endpoint:
        labels = {}
        for topic in model.topics:
            if topic.is_other or not topic.keywords:
                continue
            labels[topic.topic_id] = llm_label(
                [w for w, _ in topic.keywords],
                model.topic_documents(topic.topic_id),
                llm_config,
            )
        model = TopicModel(**{**_base_kwargs(model), "base_labels": labels})
    return model


def _base_kwargs(model: TopicModel) -> dict:
    return dict(
        model_id=model.model_id,
        corpus_id=model.corpus_id,
        doc_ids=model.doc_ids,
        doc_texts=model.doc_texts,
        embeddings=model.embeddings,
        provider_tag=model.provider_tag,
        base_assignments=model.base_assignments,
        base_labels=model.base_labels,
        curation_log=model.curation_log,
        mmr_lambda=model.mmr_lambda,
        top_k=model.top_k,
        coherence_metric=model.coherence_metric,
    )


# ---- curation ops ---------------------------------------------------------


def _check_ids_exist(model: TopicModel, ids) -> None:
    current = set(model.topic_ids())
    for tid in ids:
        if tid == OTHERS_ID:
            raise UnknownTopicId("the Others topic cannot be curated directly")
        if tid not in current:
            raise UnknownTopicId(f"no topic with id {tid}")


def merge_topics(model: TopicModel, groups: list[set[int]],
                 actor: str = "expert") -> TopicModel:
    """Each group collapses into one topic keeping the lowest id."""
    seen: set[int] = set()
    for group in groups:
        if len(group) < 2:
            raise OverlappingGroups("merge groups must have at least 2 topics")
        if seen & set(group):
            raise OverlappingGroups("merge groups must be disjoint")
        seen.update(group)
        _check_ids_exist(model, group)
    op = CurationOp(
        kind="merge",
        payload={"groups": [sorted(g) for g in groups]},
        actor=actor,
        timestamp=CurationOp.now(),
    )
    return model._with_log(model.curation_log + [op])


def mark_other(model: TopicModel, topic_ids: list[int],
               actor: str = "expert") -> TopicModel:
    """Reassign the given topics' documents to the Others category."""
    _check_ids_exist(model, topic_ids)
    op = CurationOp(
        kind="mark_other",
        payload={"topic_ids": sorted(set(topic_ids))},
        actor=actor,
        timestamp=CurationOp.now(),
    )
    return model._with_log(model.curation_log + [op])


def rename_topic(model: TopicModel, topic_id: int, label: str,
                 actor: str = "expert") -> TopicModel:
    _check_ids_exist(model, [topic_id])
    op = CurationOp(
        kind="rename",
        payload={"topic_id": topic_id, "label": label},
        actor=actor,
        timestamp=CurationOp.now(),
    )
    return model._with_log(model.curation_log + [op])


def undo(model: TopicModel, actor: str = "expert") -> TopicModel:
    if not model.curation_log or not model._effective_ops():
        raise NothingToUndo("curation log is empty")
    op = CurationOp(kind="undo", payload={}, actor=actor, timestamp=CurationOp.now())
    return model._with_log(model.curation_log + [op])


def apply_op(model: TopicModel, op: CurationOp) -> TopicModel:
    """Dispatch a CurationOp (as used by the curation service)."""
    if op.kind == "merge":
        return merge_topics(model, [set(g) for g in op.payload["groups"]], op.actor)
    if op.kind == "mark_other":
        return mark_other(model, list(op.payload["topic_ids"]), op.actor)
    if op.kind == "rename":
        return rename_topic(model, op.payload["topic_id"], op.payload["label"], op.actor)
    if op.kind == "undo":
        return undo(model, op.actor)
    raise ValueError(f"unknown curation op kind {op.kind!r}")


# ---- hierarchy and distance map -------------------------------------------


def _topic_ctfidf_rows(model: TopicModel) -> tuple[list[int], np.ndarray]:
    ids = sorted(model.topic_ids(include_other=False))
    if model.ctfidf_matrix is None:
        raise InsufficientData("model has no c-TF-IDF matrix")
    row_of = {cid: i for i, cid in enumerate(model.ctfidf_matrix.class_ids)}
    rows = np.vstack([model.ctfidf_matrix.weights[row_of[cid]] for cid in ids])
    return ids, rows


def _cosine_distance_matrix(rows: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(rows, axis=1)
    norms[norms == 0] = 1.0
    sims = (rows / norms[:, None]) @ (rows / norms[:, None]).T
    return np.clip(1.0 - sims, 0.0, 2.0)


def topic_hierarchy(model: TopicModel) -> TopicHierarchy:
    """Agglomerative average-linkage clustering of topics over c-TF-IDF rows."""
    ids, rows = _topic_ctfidf_rows(model)
    k = len(ids)
    if k < 2:
        raise InsufficientData("hierarchy needs at least 2 non-Other topics")
    base = _cosine_distance_matrix(rows)
    # groups: node index -> member leaf indices; leaves are 0..k-1
    groups: dict[int, list[int]] = {i: [i] for i in range(k)}
    active = sorted(groups)
    nodes: list[HierarchyNode] = []
    next_node = k
    while len(active) > 1:
        best = None
        for ai in range(len(active)):
            for bi in range(ai + 1, len(active)):
                ga, gb = active[ai], active[bi]
                d = float(np.mean(base[np.ix_(groups[ga], groups[gb])]))
                key = (d, min(ids[min(groups[ga])], ids[min(groups[gb])]),
                       max(ids[min(groups[ga])], ids[min(groups[gb])]))
                if best is None or key < best[0]:
                    best = (key, ga, gb)
        (d, _, _), ga, gb = best
        nodes.append(HierarchyNode(
            left=ga,
            right=gb,
            distance=d,
            leaf_topic_ids=tuple(sorted(ids[i] for i in groups[ga] + groups[gb])),
        ))
        groups[next_node] = groups.pop(ga) + groups.pop(gb)
        active = sorted(groups)
        next_node += 1
    return TopicHierarchy(leaves=tuple(ids), nodes=tuple(nodes))


def distance_map(model: TopicModel) -> list[DistanceMapEntry]:
    """Planar topic coordinates from a 2-component PCA of c-TF-IDF rows."""
    ids, rows = _topic_ctfidf_rows(model)
    if len(ids) < 2:
        raise InsufficientData("distance map needs at least 2 non-Other topics")
    layout = pca_reduce(rows, 2)
    entries = []
    for i, cid in enumerate(ids):
        topic = model.topic(cid)
        entries.append(DistanceMapEntry(
            topic_id=cid,
            x=float(layout.coords[i, 0]),
            y=float(layout.coords[i, 1]),
            size=topic.size,
            label=topic.label,
        ))
    return entries
