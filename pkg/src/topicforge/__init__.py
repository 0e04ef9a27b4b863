"""Topic modeling for therapy-session transcripts: preprocessing, hash/HTTP
embeddings, manifold reduction, density clustering, c-TF-IDF topics,
coherence evaluation, and an expert curation loop."""

from . import errors
from .density import ClusterLabeling, HdbscanParams, cluster
from .embedding import (
    EmbeddingMatrix,
    ProviderConfig,
    cosine,
    embed_documents,
    hash_embed,
    load_embedding_file,
    save_embedding_file,
)
from .evaluate import (
    CoherenceScore,
    MatchReport,
    cv_coherence,
    match_topics,
    model_coherence,
    umass_coherence,
)
from .ingest import (
    Document,
    PreprocessConfig,
    Utterance,
    parse_transcripts,
    preprocess_corpus,
    select_role,
)
from .manifold import LowDimLayout, UmapParams, pca_reduce, reduce
from .model import (
    CurationOp,
    TopicModel,
    assemble_model,
    distance_map,
    mark_other,
    merge_topics,
    rename_topic,
    topic_hierarchy,
    undo,
)
from .pipeline import Pipeline, PipelineConfig, compare_models, export_viz
from .represent import LlmConfig, Topic, ctfidf, mmr_select, tokenize_count, top_terms

__version__ = "0.1.0"

__all__ = [
    "ClusterLabeling", "CoherenceScore", "CurationOp", "Document",
    "EmbeddingMatrix", "HdbscanParams", "LlmConfig", "LowDimLayout",
    "MatchReport", "Pipeline", "PipelineConfig", "PreprocessConfig",
    "ProviderConfig", "Topic", "TopicModel", "UmapParams", "Utterance",
    "assemble_model", "cluster", "compare_models", "cosine", "ctfidf",
    "cv_coherence", "distance_map", "embed_documents", "errors", "export_viz",
    "hash_embed", "load_embedding_file", "mark_other", "match_topics",
    "merge_topics", "mmr_select", "model_coherence", "parse_transcripts",
    "pca_reduce", "preprocess_corpus", "reduce", "rename_topic",
    "save_embedding_file", "select_role", "tokenize_count", "top_terms",
    "topic_hierarchy", "umass_coherence", "undo",
]
