"""End-to-end walkthrough: synthesize a transcript corpus, run the staged
pipeline, and print the discovered topics.

Run with:  python3 demos/run_pipeline_demo.py [workdir]

The script leaves a `config.json` and an `out/` directory behind; point the
CLI at them afterwards, e.g.

    topicforge compare <workdir>/out/model.json <workdir>/out/model.json
    topicforge serve -c <workdir>/config.json
"""
from __future__ import annotations

import json
import random
import sys
from pathlib import Path

from topicforge import Pipeline, PipelineConfig

THEMES = {
    "worry": ["anxious", "panic", "worry", "racing", "tight", "breath",
              "overwhelmed", "dread", "restless", "tense"],
    "family": ["mother", "father", "sister", "childhood", "home", "holiday",
               "family", "visit", "argument", "distance"],
    "sleep": ["sleep", "insomnia", "awake", "night", "dream", "tired",
              "bedtime", "nap", "exhausted", "caffeine"],
    "work": ["deadline", "boss", "meeting", "project", "overtime", "email",
             "promotion", "colleague", "office", "burnout"],
}


def synthesize_transcript(path: Path, docs_per_theme: int = 60, seed: int = 11) -> None:
    rng = random.Random(seed)
    lines = []
    for theme, words in THEMES.items():
        for i in range(docs_per_theme):
            n = rng.randint(8, 12)
            text = " ".join(rng.choice(words) for _ in range(n)) + "."
            lines.append(json.dumps({
                "session_id": f"{theme}-{i // 10}",
                "role": "therapist",
                "speaker": "T",
                "text": text,
            }))
    rng.shuffle(lines)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def main() -> None:
    workdir = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_workdir")
    workdir.mkdir(parents=True, exist_ok=True)

    transcript = workdir / "transcripts.jsonl"
    synthesize_transcript(transcript)
    config_path = workdir / "config.json"
    config_path.write_text(json.dumps({
        "transcripts": str(transcript),
        "corpus_id": "demo",
        "output_dir": str(workdir / "out"),
        "hdbscan": {"min_cluster_size": 20},
    }, indent=2), encoding="utf-8")

    pipeline = Pipeline(PipelineConfig.from_file(config_path))
    status = pipeline.run()
    print("stage status:", status)

    model = pipeline.load_model()
    print(f"\n{len([t for t in model.topics if not t.is_other])} topics "
          f"over {len(model.doc_texts)} remarks:")
    for topic in sorted(model.topics, key=lambda t: -t.size):
        words = ", ".join(w for w, _ in topic.keywords[:5])
        tag = " (others)" if topic.is_other else ""
        print(f"  [{topic.topic_id:>2}] {topic.size:>4} docs{tag}: {words}")

    print(f"\nArtifacts in {workdir / 'out'}; run "
          f"`topicforge serve -c {config_path}` to curate interactively.")


if __name__ == "__main__":
    main()
