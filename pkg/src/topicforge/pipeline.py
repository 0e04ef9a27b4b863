"""Resumable pipeline: preprocess -> embed -> reduce -> cluster ->
represent -> label -> evaluate -> viz, with content-hash stage caching."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import density, evaluate, ingest, manifold, model as model_mod
from .embedding import (
    EmbeddingMatrix,
    ProviderConfig,
    embed_documents,
    load_embedding_file,
    save_embedding_file,
)
from .errors import InputFormatError, InsufficientData
from .represent import LlmConfig

log = logging.getLogger(__name__)

STAGES = ("documents", "embeddings", "layout", "labeling", "topics",
          "model", "coherence", "viz")


@dataclass
class PipelineConfig:
    transcripts: str
    corpus_id: str = "corpus"
    role: str = "therapist"
    output_dir: str = "out"
    seed: int = 0
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    umap: manifold.UmapParams = field(default_factory=manifold.UmapParams)
    hdbscan: density.HdbscanParams = field(default_factory=density.HdbscanParams)
    top_k: int = 10
    mmr_lambda: float = 0.9
    llm: LlmConfig = field(default_factory=LlmConfig)
    coherence_metric: str = "c_v"
    coherence_window: int = 110
    match_band: tuple[float, float] = (0.9, 1.0)
    reducer: str = "umap"  # umap | pca

    def __post_init__(self):
        # one global seed drives every stochastic stage unless overridden
        self.provider.seed = self.provider.seed or self.seed
        self.umap.seed = self.umap.seed or self.seed

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        try:
            raw = json.loads(Path(path).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputFormatError(f"config {path}: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        try:
            kwargs = dict(raw)
            if "provider" in kwargs:
                kwargs["provider"] = ProviderConfig(**kwargs["provider"])
            if "umap" in kwargs:
                kwargs["umap"] = manifold.UmapParams(**kwargs["umap"])
            if "hdbscan" in kwargs:
                kwargs["hdbscan"] = density.HdbscanParams(**kwargs["hdbscan"])
            if "llm" in kwargs:
                kwargs["llm"] = LlmConfig(**kwargs["llm"])
            if "match_band" in kwargs:
                kwargs["match_band"] = tuple(kwargs["match_band"])
            return cls(**kwargs)
        except TypeError as exc:
            raise InputFormatError(f"bad config: {exc}") from exc

    def stage_params(self, stage: str) -> dict:
        params = {
            "documents": {"transcripts": self.transcripts, "corpus_id": self.corpus_id,
                          "role": self.role},
            "embeddings": dataclasses.asdict(self.provider),
            "layout": {"reducer": self.reducer, **dataclasses.asdict(self.umap)},
            "labeling": dataclasses.asdict(self.hdbscan),
            "topics": {"top_k": self.top_k, "mmr_lambda": self.mmr_lambda},
            "model": {"llm": dataclasses.asdict(self.llm),
                      "coherence_metric": self.coherence_metric},
            "coherence": {"metric": self.coherence_metric, "window": self.coherence_window},
            "viz": {},
        }
        return params[stage]


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False).encode("utf-8")


STAGE_FILES = {
    "documents": ("documents.jsonl",),
    "embeddings": ("embeddings.bin", "embeddings.bin.json"),
    "layout": ("layout.bin", "layout.bin.json"),
    "labeling": ("labeling.json",),
    "topics": ("topics.json",),
    "model": ("model.json",),
    "coherence": ("coherence.json",),
    "viz": ("dendrogram.json", "distance_map.json", "topic_summary.json"),
}

STAGE_DEPS = {
    "documents": (),
    "embeddings": ("documents",),
    "layout": ("embeddings",),
    "labeling": ("layout",),
    "topics": ("documents", "embeddings", "labeling"),
    "model": ("documents", "embeddings", "labeling"),
    "coherence": ("model",),
    "viz": ("model",),
}


class Pipeline:
    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.output_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.out / "manifest.json"
        self.manifest = (json.loads(self.manifest_path.read_text("utf-8"))
                         if self.manifest_path.exists() else {})

    # -- caching ------------------------------------------------------------

    def _content_hash(self, stage: str) -> str:
        h = hashlib.sha256()
        for name in STAGE_FILES[stage]:
            h.update((self.out / name).read_bytes())
        return h.hexdigest()

    def _config_hash(self, stage: str) -> str:
        upstream = {dep: self.manifest.get(dep, {}).get("content_hash", "")
                    for dep in STAGE_DEPS[stage]}
        if stage == "documents":
            transcript = Path(self.config.transcripts)
            upstream["__input__"] = _sha256(transcript.read_bytes()) if transcript.exists() else ""
        return _sha256(_canonical({"params": self.config.stage_params(stage),
                                   "upstream": upstream}))

    def _up_to_date(self, stage: str) -> bool:
        entry = self.manifest.get(stage)
        if not entry:
            return False
        if not all((self.out / name).exists() for name in STAGE_FILES[stage]):
            return False
        if entry.get("config_hash") != self._config_hash(stage):
            return False
        return entry.get("content_hash") == self._content_hash(stage)

    def _record(self, stage: str) -> None:
        self.manifest[stage] = {
            "config_hash": self._config_hash(stage),
            "content_hash": self._content_hash(stage),
        }
        self.manifest_path.write_text(json.dumps(self.manifest, indent=2), "utf-8")

    # -- artifact loaders ---------------------------------------------------

    def load_documents(self) -> list[ingest.Document]:
        with open(self.out / "documents.jsonl", encoding="utf-8") as fh:
            return ingest.documents_from_jsonl(fh)

    def load_layout(self) -> np.ndarray:
        return load_embedding_file(self.out / "layout.bin").data.astype(np.float64)

    def load_labeling(self) -> density.ClusterLabeling:
        raw = json.loads((self.out / "labeling.json").read_text("utf-8"))
        return density.ClusterLabeling(
            labels=np.asarray(raw["labels"], dtype=np.int64),
            stabilities=np.asarray(raw["stabilities"]),
            membership_strength=np.asarray(raw["membership"]),
        )

    def load_model(self) -> model_mod.TopicModel:
        return model_mod.TopicModel.load(self.out / "model.json")

    # -- stage implementations ----------------------------------------------

    def _run_documents(self) -> None:
        with open(self.config.transcripts, encoding="utf-8") as fh:
            utterances = ingest.parse_transcripts(fh, self.config.corpus_id)
        utterances = ingest.select_role(utterances, self.config.role)
        docs = ingest.preprocess_corpus(
            utterances, ingest.PreprocessConfig.default(), self.config.corpus_id)
        (self.out / "documents.jsonl").write_text(
            ingest.documents_to_jsonl(docs), "utf-8")

    def _run_embeddings(self) -> None:
        docs = self.load_documents()
        matrix = embed_documents(docs, self.config.provider)
        save_embedding_file(matrix, self.out / "embeddings.bin")

    def _run_layout(self) -> None:
        matrix = load_embedding_file(self.out / "embeddings.bin")
        if self.config.reducer == "pca":
            layout = manifold.pca_reduce(matrix, self.config.umap.n_components)
        else:
            layout = manifold.reduce(matrix, self.config.umap)
        save_embedding_file(
            EmbeddingMatrix(
                data=layout.coords.astype(np.float32),
                doc_ids=matrix.doc_ids,
                provider_tag=json.dumps(
                    {"reducer": self.config.reducer,
                     **dataclasses.asdict(self.config.umap)}, sort_keys=True),
            ),
            self.out / "layout.bin",
        )

    def _run_labeling(self) -> None:
        labeling = density.cluster(self.load_layout(), self.config.hdbscan)
        (self.out / "labeling.json").write_text(json.dumps({
            "params": dataclasses.asdict(self.config.hdbscan),
            "labels": [int(x) for x in labeling.labels],
            "stabilities": [float(x) for x in labeling.stabilities],
            "membership": [float(x) for x in labeling.membership_strength],
        }, sort_keys=True), "utf-8")

    def _assemble(self, with_llm: bool) -> model_mod.TopicModel:
        docs = self.load_documents()
        matrix = load_embedding_file(self.out / "embeddings.bin")
        labeling = self.load_labeling()
        return model_mod.assemble_model(
            docs, matrix, labeling,
            llm_config=self.config.llm if with_llm else None,
            mmr_lambda=self.config.mmr_lambda,
            top_k=self.config.top_k,
            coherence_metric=self.config.coherence_metric,
        )

    def _run_topics(self) -> None:
        topic_model = self._assemble(with_llm=False)
        (self.out / "topics.json").write_text(json.dumps([
            {"topic_id": t.topic_id, "size": t.size, "label": t.label,
             "is_other": t.is_other,
             "keywords": [[w, s] for w, s in t.keywords]}
            for t in topic_model.topics
        ], sort_keys=True), "utf-8")

    def _run_model(self) -> None:
        self._assemble(with_llm=True).save(self.out / "model.json")

    def _run_coherence(self) -> None:
        topic_model = self.load_model()
        score = evaluate.model_coherence(
            topic_model, topic_model.doc_texts,
            metric=self.config.coherence_metric,
            window=self.config.coherence_window,
        )
        (self.out / "coherence.json").write_text(json.dumps({
            "metric": score.metric,
            "per_topic": {str(tid): s for tid, s in zip(score.topic_ids, score.per_topic)},
            "mean": score.mean,
            "params": {"top_n": score.top_n, "window": score.window,
                       "epsilon": score.epsilon},
        }, sort_keys=True), "utf-8")

    def _run_viz(self) -> None:
        export_viz(self.load_model(), self.out)

    def run(self, stages: tuple[str, ...] | None = None) -> dict[str, str]:
        """Execute stages in order, reusing up-to-date artifacts."""
        wanted = set(stages or STAGES)
        unknown = wanted - set(STAGES)
        if unknown:
            raise InputFormatError(f"unknown stages {sorted(unknown)}")
        status = {}
        runners = {
            "documents": self._run_documents,
            "embeddings": self._run_embeddings,
            "layout": self._run_layout,
            "labeling": self._run_labeling,
            "topics": self._run_topics,
            "model": self._run_model,
            "coherence": self._run_coherence,
            "viz": self._run_viz,
        }
        for stage in STAGES:
            if stage not in wanted:
                continue
            if self._up_to_date(stage):
                status[stage] = "up to date"
                log.info("stage %s: up to date", stage)
                continue
            log.info("stage %s: running", stage)
            runners[stage]()
            self._record(stage)
            status[stage] = "built"
        return status


def export_viz(topic_model: model_mod.TopicModel, out_dir: str | Path) -> dict[str, Path]:
    """Dendrogram, distance-map, and topic-summary JSON for plotting/UI use."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    non_other = topic_model.topic_ids(include_other=False)
    if len(non_other) < 2:
        raise InsufficientData("viz export needs at least 2 non-Other topics")
    hierarchy = model_mod.topic_hierarchy(topic_model)
    dmap = model_mod.distance_map(topic_model)
    paths = {}
    paths["dendrogram"] = out / "dendrogram.json"
    paths["dendrogram"].write_text(json.dumps({
        "leaves": list(hierarchy.leaves),
        "nodes": [{"left": n.left, "right": n.right, "distance": n.distance,
                   "leaf_topic_ids": list(n.leaf_topic_ids)}
                  for n in hierarchy.nodes],
    }, sort_keys=True), "utf-8")
    paths["distance_map"] = out / "distance_map.json"
    paths["distance_map"].write_text(json.dumps([
        {"topic_id": e.topic_id, "x": e.x, "y": e.y, "size": e.size, "label": e.label}
        for e in dmap
    ], sort_keys=True), "utf-8")
    paths["topic_summary"] = out / "topic_summary.json"
    paths["topic_summary"].write_text(json.dumps([
        {"topic_id": t.topic_id, "size": t.size, "label": t.label,
         "is_other": t.is_other, "keywords": [[w, s] for w, s in t.keywords]}
        for t in topic_model.topics
    ], sort_keys=True), "utf-8")
    return paths


def compare_models(model_a: model_mod.TopicModel, model_b: model_mod.TopicModel,
                   band: tuple[float, float] = (0.9, 1.0)) -> evaluate.MatchReport:
    return evaluate.match_topics(model_a, model_b, band)


def write_match_report(report: evaluate.MatchReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps({
        "band": list(report.band),
        "pairs": [[a, b, c] for a, b, c in report.pairs],
        "matched": [[a, b, c] for a, b, c in report.matched],
    }, sort_keys=True), "utf-8")


def format_match_table(report: evaluate.MatchReport,
                       model_a: model_mod.TopicModel,
                       model_b: model_mod.TopicModel) -> str:
    lines = [f"matched topic pairs (cosine in [{report.band[0]}, {report.band[1]}]):"]
    for a, b, c in report.matched:
        la = model_a.topic(a).label
        lb = model_b.topic(b).label
        lines.append(f"  - {la!r} ({a}) <-> {lb!r} ({b}): {c:.3f}")
    if len(lines) == 1:
        lines.append("  (none)")
    return "\n".join(lines)
