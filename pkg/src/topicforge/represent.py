"""Per-cluster topic representations: bag-of-words, c-TF-IDF keyword
scoring, MMR diversification, centroids, and LLM-generated labels."""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import requests

from .embedding import cosine, hash_embed
from .errors import EmptyVocabulary, ProviderUnavailable

log = logging.getLogger(__name__)

_WORD_RE = re.compile(r"[\w']+")

LABEL_MAX_WORDS = 5
FALLBACK_KEYWORDS = 3
N_REPRESENTATIVE_DOCS = 4
TOP_K_DEFAULT = 10


def label_prompt_template() -> str:
    return resources.files("topicforge.data").joinpath("label_prompt.txt").read_text("utf-8")


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]  # lexicographically ordered 1- and 2-grams
    doc_frequency: np.ndarray

    @property
    def term_index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.terms)}


@dataclass(frozen=True)
class CtfidfMatrix:
    weights: np.ndarray  # (n_classes, n_terms)
    avg_words_per_class: float
    corpus_term_frequency: np.ndarray
    class_ids: tuple[int, ...]


@dataclass
class Topic:
    topic_id: int  # -1 reserved for "Others"
    size: int
    keywords: list[tuple[str, float]]  # sorted by weight descending
    label: str
    centroid: np.ndarray
    is_other: bool = False


def ngrams(text: str, n_min: int = 1, n_max: int = 2) -> list[str]:
    tokens = _WORD_RE.findall(text)
    grams: list[str] = []
    for n in range(n_min, n_max + 1):
        grams.extend(" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
    return grams


def tokenize_count(
    docs_by_class: dict[int, list[str]],
    min_df: int = 2,
) -> tuple[Vocabulary, np.ndarray, tuple[int, ...]]:
    """Bag-of-1/2-grams per class; terms in fewer than min_df documents
    overall are dropped. Returns (vocabulary, class x term counts, class ids)."""
    if not docs_by_class:
        raise EmptyVocabulary("no classes to count")
    df: dict[str, int] = {}
    for docs in docs_by_class.values():
        for doc in docs:
            for term in set(ngrams(doc)):
                df[term] = df.get(term, 0) + 1
    terms = tuple(sorted(t for t, c in df.items() if c >= min_df))
    if not terms:
        raise EmptyVocabulary(f"no term appears in at least {min_df} documents")
    index = {t: i for i, t in enumerate(terms)}
    class_ids = tuple(sorted(docs_by_class))
    counts = np.zeros((len(class_ids), len(terms)), dtype=np.int64)
    for row, cid in enumerate(class_ids):
        for doc in docs_by_class[cid]:
            for term in ngrams(doc):
                col = index.get(term)
                if col is not None:
                    counts[row, col] += 1
    vocab = Vocabulary(terms=terms, doc_frequency=np.array([df[t] for t in terms]))
    return vocab, counts, class_ids


def ctfidf(class_tf: np.ndarray, class_ids: tuple[int, ...] | None = None) -> CtfidfMatrix:
    """Class-based TF-IDF: W[t,c] = tf[t,c] * ln(1 + A / f_t)."""
    class_tf = np.asarray(class_tf, dtype=float)
    if class_tf.ndim != 2 or class_tf.shape[0] < 1:
        raise EmptyVocabulary("need at least one class")
    avg_words = class_tf.sum() / class_tf.shape[0]
    f_t = class_tf.sum(axis=0)
    idf = np.log1p(np.divide(avg_words, f_t, out=np.zeros_like(f_t), where=f_t > 0))
    return CtfidfMatrix(
        weights=class_tf * idf[None, :],
        avg_words_per_class=float(avg_words),
        corpus_term_frequency=f_t,
        class_ids=class_ids or tuple(range(class_tf.shape[0])),
    )


def top_terms(matrix: CtfidfMatrix, vocab: Vocabulary, class_row: int,
              k: int = TOP_K_DEFAULT) -> list[tuple[str, float]]:
    """k highest-weight nonzero terms; equal weights rank lexicographically."""
    row = matrix.weights[class_row]
    nonzero = np.nonzero(row)[0]
    # terms are lexicographically sorted, so a stable sort on -weight
    # resolves ties in term order
    order = nonzero[np.argsort(-row[nonzero], kind="stable")][:k]
    return [(vocab.terms[i], float(row[i])) for i in order]


def mmr_select(
    candidates: list[tuple[str, float]],
    term_vectors: dict[str, np.ndarray] | None = None,
    lam: float = 0.7,
    k: int = TOP_K_DEFAULT,
    hash_dim: int = 256,
    seed: int = 0,
) -> list[tuple[str, float]]:
    """Greedy maximal-marginal-relevance reranking of keyword candidates.

    score = lam * relevance - (1 - lam) * max cosine to already-selected;
    ties go to the lower candidate index. Without configured term vectors
    the hash embedder supplies them.
    """
    if not candidates:
        return []
    if term_vectors is None:
        term_vectors = {t: hash_embed(t, hash_dim, seed) for t, _ in candidates}
    chosen: list[int] = []
    remaining = list(range(len(candidates)))
    while remaining and len(chosen) < k:
        best_idx = None
        best_score = -np.inf
        for idx in remaining:
            term, rel = candidates[idx]
            redundancy = 0.0
            for c in chosen:
                redundancy = max(redundancy, cosine(term_vectors[term],
                                                    term_vectors[candidates[c][0]]))
            score = lam * rel - (1.0 - lam) * redundancy
            if score > best_score:
                best_score = score
                best_idx = idx
        chosen.append(best_idx)
        remaining.remove(best_idx)
    return [candidates[i] for i in chosen]


def topic_centroid(member_embeddings: np.ndarray) -> np.ndarray:
    member_embeddings = np.atleast_2d(np.asarray(member_embeddings, float))
    if member_embeddings.shape[0] < 1:
        raise ValueError("centroid of zero members")
    centroid = member_embeddings.mean(axis=0)
    if np.linalg.norm(centroid) == 0:
        log.warning("degenerate zero centroid; cosine comparisons undefined")
    return centroid


def representative_documents(texts: list[str], vectors: np.ndarray,
                             centroid: np.ndarray,
                             limit: int = N_REPRESENTATIVE_DOCS) -> list[str]:
    """Documents closest to the centroid by cosine, most similar first."""
    if np.linalg.norm(centroid) == 0:
        return texts[:limit]
    sims = []
    for i, v in enumerate(vectors):
        norm = np.linalg.norm(v)
        sims.append(cosine(v, centroid) if norm > 0 else -1.0)
    order = np.argsort(-np.asarray(sims), kind="stable")[:limit]
    return [texts[i] for i in order]


@dataclass
class LlmConfig:
    endpoint: str | None = None
    model: str = "gpt-4o-mini"
    timeout: float = 30.0
    retries: int = 3


def render_label_prompt(keywords: list[str], documents: list[str]) -> str:
    template = label_prompt_template()
    doc_block = "\n".join(documents[:N_REPRESENTATIVE_DOCS])
    kw_block = ", ".join(keywords[:TOP_K_DEFAULT])
    return template.replace("[DOCUMENTS]", doc_block).replace("[KEYWORDS]", kw_block)


def fallback_label(keywords: list[str]) -> str:
    return "/".join(keywords[:FALLBACK_KEYWORDS])


def _parse_label(response_text: str) -> str:
    marker = "topic:"
    pos = response_text.lower().rfind(marker)
    label = response_text[pos + len(marker):] if pos >= 0 else response_text
    label = label.strip().splitlines()[0].strip() if label.strip() else ""
    words = label.split()
    return " ".join(words[:LABEL_MAX_WORDS])


def llm_label(keywords: list[str], representative_docs: list[str],
              config: LlmConfig | None = None) -> str:
    """Topic label from a chat-completion service; falls back to the top
    keywords when no client is configured or the service stays down."""
    if not keywords:
        raise ValueError("llm_label requires keywords")
    if config is None or not config.endpoint:
        return fallback_label(keywords)
    prompt = render_label_prompt(keywords, representative_docs)
    payload = {
        "model": config.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": 0,
    }
    last_exc: Exception | None = None
    for attempt in range(config.retries):
        try:
            resp = requests.post(config.endpoint, json=payload, timeout=config.timeout)
            resp.raise_for_status()
            label = _parse_label(resp.json()["text"])
            if label:
                return label
            raise ValueError("empty label in response")
        except (requests.RequestException, KeyError, ValueError) as exc:
            last_exc = exc
            time.sleep(min(2.0 ** attempt * 0.1, 2.0))
    log.warning("label service unavailable (%s); using keyword fallback",
                ProviderUnavailable(str(last_exc)))
    return fallback_label(keywords)
