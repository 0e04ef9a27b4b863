"""Curation walkthrough on a synthetic corpus: merge two topics, rename the
result, check the coherence delta, and undo — every step a pure function of
the previous model.

Run with:  python3 demos/curation_demo.py
"""
from __future__ import annotations

import json
import random

from topicforge import (
    HdbscanParams,
    PreprocessConfig,
    ProviderConfig,
    UmapParams,
    assemble_model,
    cluster,
    embed_documents,
    ingest,
    merge_topics,
    model_coherence,
    reduce,
    rename_topic,
    undo,
)

THEMES = [
    ["anxious", "panic", "worry", "racing", "dread", "tense", "restless"],
    ["mother", "father", "sister", "childhood", "home", "family", "visit"],
    ["sleep", "insomnia", "awake", "night", "dream", "tired", "exhausted"],
    ["deadline", "boss", "meeting", "project", "overtime", "email", "office"],
]


def build_model():
    rng = random.Random(5)
    lines = []
    for t, words in enumerate(THEMES):
        for i in range(50):
            text = " ".join(rng.choice(words) for _ in range(rng.randint(8, 12)))
            lines.append(json.dumps({"session_id": f"s{t}", "role": "therapist",
                                     "speaker": "T", "text": text + "."}))
    utterances = ingest.parse_transcripts(iter(lines), "demo")
    docs = ingest.preprocess_corpus(
        ingest.select_role(utterances, "therapist"), PreprocessConfig(), "demo")
    matrix = embed_documents(docs, ProviderConfig(kind="hash", hash_dim=128, seed=0))
    layout = reduce(matrix, UmapParams(seed=0))
    labeling = cluster(layout, HdbscanParams(min_cluster_size=20))
    return docs, assemble_model(docs, matrix, labeling)


def describe(model, texts, title):
    score = model_coherence(model, texts)
    print(f"\n== {title} (version {model.version}, "
          f"mean c_v {score.mean:.4f}) ==")
    for topic in sorted(model.topics, key=lambda t: -t.size):
        words = ", ".join(w for w, _ in topic.keywords[:5])
        print(f"  [{topic.topic_id:>2}] '{topic.label}' ({topic.size} docs): {words}")
    return score.mean


def main() -> None:
    docs, model = build_model()
    texts = [d.text for d in docs]
    before = describe(model, texts, "as discovered")

    ids = sorted(t.topic_id for t in model.topics if not t.is_other)[:2]
    merged = merge_topics(model, [set(ids)])
    after = describe(merged, texts, f"after merging {ids}")
    print(f"\ncoherence delta from merge: {after - before:+.4f}")

    renamed = rename_topic(merged, ids[0], "combined theme")
    print(f"\nrenamed topic {ids[0]} -> "
          f"'{next(t.label for t in renamed.topics if t.topic_id == ids[0])}' "
          f"(version {renamed.version})")

    reverted = undo(undo(renamed))
    restored = describe(reverted, texts, "after undoing both edits")
    assert abs(restored - before) < 1e-12, "undo must restore the original model"
    print("\nundo restored the original topics exactly.")


if __name__ == "__main__":
    main()
