import json

import numpy as np
import pytest

from topicforge import (
    ClusterLabeling,
    HdbscanParams,
    ProviderConfig,
    UmapParams,
    assemble_model,
    cluster,
    embed_documents,
    reduce,
)
from topicforge.ingest import Document

# six disjoint keyword pools used by the synthetic-corpus fixtures
POOLS = [
    ["anxiety", "worry", "panic", "nervous", "fear",
     "tension", "stress", "dread", "unease", "apprehension"],
    ["mother", "father", "family", "childhood", "parent",
     "sibling", "brother", "sister", "upbringing", "household"],
    ["sleep", "insomnia", "dream", "nightmare", "rest",
     "tired", "fatigue", "bedtime", "waking", "drowsy"],
    ["work", "job", "boss", "career", "office",
     "colleague", "deadline", "salary", "workload", "promotion"],
    ["marriage", "partner", "divorce", "spouse", "wedding",
     "romance", "intimacy", "commitment", "affection", "trust"],
    ["medication", "dosage", "prescription", "pill", "doctor",
     "treatment", "therapy", "diagnosis", "symptom", "clinic"],
]


def pool_documents(pool_indices, n_docs, corpus_id="syn", seed=7,
                   session_id="s1"):
    """Documents drawn from the given keyword pools, round-robin."""
    rng = np.random.RandomState(seed)
    docs, truth = [], []
    for i in range(n_docs):
        p = pool_indices[i % len(pool_indices)]
        n = rng.randint(8, 13)
        words = [POOLS[p][rng.randint(len(POOLS[p]))] for _ in range(n)]
        docs.append(Document(
            doc_id=f"{corpus_id}:{session_id}:{i}:0",
            text=" ".join(words),
            corpus_id=corpus_id,
            session_id=session_id,
            utterance_index=i,
            sentence_ordinal=0,
        ))
        truth.append(p)
    return docs, np.array(truth)


def transcript_lines(pool_indices, n_docs, seed=7, role="therapist"):
    rng = np.random.RandomState(seed)
    lines = []
    for i in range(n_docs):
        p = pool_indices[i % len(pool_indices)]
        n = rng.randint(8, 13)
        words = [POOLS[p][rng.randint(len(POOLS[p]))] for _ in range(n)]
        lines.append(json.dumps({
            "session_id": "s1", "role": role, "speaker": "T",
            "text": " ".join(words) + ".",
        }))
    return "\n".join(lines) + "\n"


def blob_data(n_per_blob=100, dim=10, scale=0.05, n_blobs=3, sep=20.0, seed=0):
    rng = np.random.RandomState(seed)
    centers = np.zeros((n_blobs, dim))
    for i in range(1, n_blobs):
        centers[i, (i - 1) % dim] = sep
    data = np.vstack([c + scale * rng.randn(n_per_blob, dim) for c in centers])
    labels = np.repeat(np.arange(n_blobs), n_per_blob)
    return data, labels


def adjusted_rand_index(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    ua, ub = np.unique(a), np.unique(b)
    table = np.array([[np.sum((a == x) & (b == y)) for y in ub] for x in ua])

    def comb2(x):
        return x * (x - 1) // 2

    sum_ij = sum(comb2(int(v)) for v in table.ravel())
    sum_i = sum(comb2(int(v)) for v in table.sum(axis=1))
    sum_j = sum(comb2(int(v)) for v in table.sum(axis=0))
    total = comb2(len(a))
    expected = sum_i * sum_j / total
    denom = (sum_i + sum_j) / 2 - expected
    return 1.0 if denom == 0 else (sum_ij - expected) / denom


@pytest.fixture(scope="session")
def six_pool_corpus():
    docs, truth = pool_documents(range(6), 600)
    matrix = embed_documents(docs, ProviderConfig(kind="hash", hash_dim=256, seed=0))
    return docs, truth, matrix


@pytest.fixture(scope="session")
def six_pool_model(six_pool_corpus):
    docs, truth, matrix = six_pool_corpus
    layout = reduce(matrix, UmapParams(seed=0))
    labeling = cluster(layout, HdbscanParams(min_cluster_size=30))
    return assemble_model(docs, matrix, labeling), truth


@pytest.fixture(scope="session")
def small_model():
    """Tiny three-topic model with an Others bucket, cheap to rebuild."""
    docs, truth = pool_documents(range(3), 90, corpus_id="mini", seed=3)
    matrix = embed_documents(docs, ProviderConfig(kind="hash", hash_dim=64, seed=0))
    labels = truth.copy()
    labels[:6] = -1  # a few noise documents
    labeling = ClusterLabeling(
        labels=labels,
        stabilities=np.ones(3),
        membership_strength=np.ones(90),
    )
    return assemble_model(docs, matrix, labeling)
