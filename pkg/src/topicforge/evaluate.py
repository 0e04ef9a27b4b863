"""Topic-quality metrics (UMass and C_v coherence) and cross-corpus topic
matching by centroid cosine similarity."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .embedding import cosine
from .errors import DimensionMismatch, InsufficientData, UnknownWord, ProviderTagMismatch
from .represent import _WORD_RE

DEFAULT_WINDOW = 110
DEFAULT_TOP_N = 10
EPSILON = 1e-12
MATCH_BAND = (0.9, 1.0)


@dataclass(frozen=True)
class CoherenceScore:
    metric: str  # u_mass | c_v
    per_topic: tuple[float, ...]
    mean: float
    topic_ids: tuple[int, ...]
    top_n: int = DEFAULT_TOP_N
    window: int = DEFAULT_WINDOW
    epsilon: float = EPSILON


@dataclass(frozen=True)
class MatchReport:
    pairs: tuple[tuple[int, int, float], ...]
    band: tuple[float, float]
    matched: tuple[tuple[int, int, float], ...]


def _doc_term_sets(documents: list[str]) -> list[set[str]]:
    out = []
    for doc in documents:
        tokens = _WORD_RE.findall(doc.lower())
        grams = set(tokens)
        grams.update(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
        out.append(grams)
    return out


def umass_coherence(topic_words: list[str], documents: list[str]) -> float:
    """Sum over ordered word pairs of ln((D(w_m, w_l) + 1) / D(w_l)),
    words ordered by descending topic weight."""
    if len(topic_words) < 2:
        raise InsufficientData("UMass needs at least 2 words")
    doc_sets = _doc_term_sets(documents)
    occurs = {w: sum(1 for s in doc_sets if w in s) for w in topic_words}
    for w, d in occurs.items():
        if d == 0:
            raise UnknownWord(f"word {w!r} absent from corpus")
    score = 0.0
    for m in range(1, len(topic_words)):
        for l in range(m):
            w_m, w_l = topic_words[m], topic_words[l]
            co = sum(1 for s in doc_sets if w_m in s and w_l in s)
            score += np.log((co + 1.0) / occurs[w_l])
    return float(score)


def _windows(documents: list[str], window: int) -> list[list[str]]:
    """Token windows of fixed width sliding by one; short docs give one window."""
    out: list[list[str]] = []
    for doc in documents:
        tokens = _WORD_RE.findall(doc.lower())
        if not tokens:
            continue
        if len(tokens) <= window:
            out.append(tokens)
        else:
            out.extend(tokens[i:i + window] for i in range(len(tokens) - window + 1))
    return out


def _window_contains(tokens: list[str], term: str) -> bool:
    if " " not in term:
        return term in tokens
    a, b = term.split(" ", 1)
    return any(x == a and y == b for x, y in zip(tokens, tokens[1:]))


def cv_coherence(topic_words: list[str], documents: list[str],
                 window: int = DEFAULT_WINDOW, epsilon: float = EPSILON) -> float:
    """Cosine-over-NPMI-vector coherence with boolean sliding windows."""
    if len(topic_words) < 2:
        raise InsufficientData("C_v needs at least 2 words")
    wins = _windows(documents, window)
    if not wins:
        raise InsufficientData("empty corpus")
    n_win = len(wins)
    present = np.zeros((len(topic_words), n_win), dtype=bool)
    for i, w in enumerate(topic_words):
        for j, tokens in enumerate(wins):
            present[i, j] = _window_contains(tokens, w)
    p_single = present.mean(axis=1)
    for w, p in zip(topic_words, p_single):
        if p == 0.0:
            raise UnknownWord(f"word {w!r} absent from corpus windows")
    n = len(topic_words)
    npmi = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            p_joint = np.mean(present[i] & present[j])
            num = np.log((p_joint + epsilon) / (p_single[i] * p_single[j]))
            den = -np.log(p_joint + epsilon)
            npmi[i, j] = num / den if den != 0 else 0.0
    total = npmi.sum(axis=0)
    score = float(np.mean([cosine(npmi[i], total) for i in range(n)]))
    return float(np.clip(score, -1.0, 1.0))


def model_coherence(model, documents: list[str], metric: str = "c_v",
                    top_n: int = DEFAULT_TOP_N, window: int = DEFAULT_WINDOW) -> CoherenceScore:
    """Per-topic coherence over the top keywords; the Others topic is excluded."""
    topics = [t for t in model.topics if not t.is_other]
    if not topics:
        raise InsufficientData("model has no non-Other topic")
    scorer = {"u_mass": umass_coherence, "c_v": cv_coherence}[metric]
    per_topic = []
    ids = []
    for topic in topics:
        words = [w for w, _ in topic.keywords[:top_n]]
        if metric == "c_v":
            per_topic.append(scorer(words, documents, window))
        else:
            per_topic.append(scorer(words, documents))
        ids.append(topic.topic_id)
    return CoherenceScore(
        metric=metric,
        per_topic=tuple(per_topic),
        mean=float(np.mean(per_topic)),
        topic_ids=tuple(ids),
        top_n=top_n,
        window=window,
    )


def match_topics(model_a, model_b, band: tuple[float, float] = MATCH_BAND) -> MatchReport:
    """All cross-corpus centroid cosines, plus a greedy one-to-one matching
    restricted to the band."""
    topics_a = [t for t in model_a.topics if not t.is_other]
    topics_b = [t for t in model_b.topics if not t.is_other]
    if not topics_a or not topics_b:
        raise InsufficientData("both models need at least one non-Other topic")
    if topics_a[0].centroid.shape != topics_b[0].centroid.shape:
        raise DimensionMismatch("centroid dimensions differ between models")
    if getattr(model_a, "provider_tag", "") != getattr(model_b, "provider_tag", ""):
        warnings.warn("models were embedded by different providers; "
                      "cosines may not be comparable", ProviderTagMismatch)
    pairs = []
    for ta in topics_a:
        for tb in topics_b:
            pairs.append((ta.topic_id, tb.topic_id, cosine(ta.centroid, tb.centroid)))
    lo, hi = band
    candidates = sorted(
        (p for p in pairs if lo <= p[2] <= hi),
        key=lambda p: (-p[2], p[0], p[1]),
    )
    used_a: set[int] = set()
    used_b: set[int] = set()
    matched = []
    for a, b, c in candidates:
        if a in used_a or b in used_b:
            continue
        matched.append((a, b, c))
        used_a.add(a)
        used_b.add(b)
    return MatchReport(pairs=tuple(pairs), band=band, matched=tuple(matched))
