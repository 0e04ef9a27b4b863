"""Transcript parsing and sentence-level preprocessing.

Turns speaker-labeled JSONL transcripts into lowercase, metadata-free
sentence documents for one speaker role. Pipeline order per document:
segment -> strip_metadata -> normalize_lexical -> lowercase.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import IO, Iterable

from .errors import EmptyCorpus, InputFormatError

log = logging.getLogger(__name__)

ROLES = ("therapist", "client", "other")

_DEFAULT_ABBREVIATIONS = {
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "etc.", "e.g.", "i.e.",
    "vs.", "jr.", "sr.", "no.", "p.m.", "a.m.",
}
_DEFAULT_PAUSE_PATTERNS = (r"\(\d+(?:\.\d+)?\)", r"\[pause\]")
_DEFAULT_IDENTIFIER_PATTERNS = (r"^\s*Q\d+:\s*",)

# strips punctuation off a token while keeping the core for table lookup
_TOKEN_CORE = re.compile(r"^(\W*)([\w'’-]*\w|\w)?(\W*)$", re.UNICODE)


@dataclass(frozen=True)
class Utterance:
    session_id: str
    speaker: str
    role: str
    index: int
    text: str
    t_start: float | None = None


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    corpus_id: str
    session_id: str
    utterance_index: int
    sentence_ordinal: int


def _load_text_asset(name: str) -> str:
    return resources.files("topicforge.data").joinpath(name).read_text("utf-8")


@dataclass
class PreprocessConfig:
    contraction_table: dict[str, str] = field(default_factory=dict)
    filler_list: set[str] = field(default_factory=set)
    orthographic_table: dict[str, str] = field(default_factory=dict)
    pause_mark_patterns: tuple[str, ...] = _DEFAULT_PAUSE_PATTERNS
    identifier_patterns: tuple[str, ...] = _DEFAULT_IDENTIFIER_PATTERNS
    abbreviation_exceptions: frozenset[str] = frozenset(_DEFAULT_ABBREVIATIONS)

    def __post_init__(self):
        # patterns must compile up front, not at first use
        for pat in tuple(self.pause_mark_patterns) + tuple(self.identifier_patterns):
            re.compile(pat)

    @classmethod
    def default(cls) -> "PreprocessConfig":
        contractions = json.loads(_load_text_asset("contractions.json"))
        fillers = {w.strip() for w in _load_text_asset("fillers.txt").splitlines() if w.strip()}
        ortho = json.loads(_load_text_asset("orthography.json"))
        return cls(
            contraction_table=contractions,
            filler_list=fillers,
            orthographic_table=ortho,
        )


def parse_transcripts(stream: Iterable[str] | IO[str], corpus_id: str) -> list[Utterance]:
    """Parse a JSONL transcript stream into per-session indexed utterances."""
    utterances: list[Utterance] = []
    counters: dict[str, int] = {}
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
        if not isinstance(rec, dict):
            raise InputFormatError(f"line {lineno}: expected a JSON object")
        for key in ("session_id", "role", "text"):
            if key not in rec:
                raise InputFormatError(f"line {lineno}: missing field {key!r}")
        role = rec["role"]
        if role not in ROLES:
            raise InputFormatError(f"line {lineno}: unknown role {role!r}")
        text = rec["text"]
        if not isinstance(text, str) or not text.strip():
            raise InputFormatError(f"line {lineno}: empty text")
        sid = str(rec["session_id"])
        idx = counters.get(sid, 0)
        counters[sid] = idx + 1
        utterances.append(Utterance(
            session_id=sid,
            speaker=str(rec.get("speaker", "")),
            role=role,
            index=idx,
            text=text,
            t_start=rec.get("t_start"),
        ))
    if not utterances:
        raise EmptyCorpus(f"no utterances in corpus {corpus_id!r}")
    return utterances


def select_role(utterances: list[Utterance], role: str) -> list[Utterance]:
    """Order-preserving filter to one speaker role."""
    selected = [u for u in utterances if u.role == role]
    if not selected:
        log.warning("no utterances with role %r", role)
    return selected


def segment_sentences(text: str, config: PreprocessConfig) -> list[str]:
    """Split text at sentence terminators (., !, ?) outside abbreviations."""
    sentences: list[str] = []
    tokens = text.split()
    current: list[str] = []
    for tok in tokens:
        current.append(tok)
        if tok and tok[-1] in ".!?":
            if tok.lower() in config.abbreviation_exceptions:
                continue
            sentences.append(" ".join(current))
            current = []
    if current:
        sentences.append(" ".join(current))
    return sentences


def strip_metadata(sentence: str, config: PreprocessConfig) -> str:
    """Remove pause marks and identifier tokens, preserving everything else."""
    out = sentence
    for pat in config.identifier_patterns:
        out = re.sub(pat, " ", out)
    for pat in config.pause_mark_patterns:
        out = re.sub(pat, " ", out)
    return re.sub(r"\s+", " ", out).strip()


def normalize_lexical(sentence: str, config: PreprocessConfig) -> str:
    """Expand contractions, drop fillers, and unify orthographic variants."""
    out_tokens: list[str] = []
    for tok in sentence.split():
        m = _TOKEN_CORE.match(tok)
        if m is None or not m.group(2):
            out_tokens.append(tok)
            continue
        prefix, core, suffix = m.group(1), m.group(2), m.group(3)
        key = core.lower().replace("’", "'")
        if key in config.filler_list:
            continue
        if key in config.contraction_table:
            core = config.contraction_table[key]
        elif key in config.orthographic_table:
            core = config.orthographic_table[key]
        out_tokens.append(prefix + core + suffix)
    return re.sub(r"\s+", " ", " ".join(out_tokens)).strip()


def preprocess_corpus(
    utterances: list[Utterance],
    config: PreprocessConfig,
    corpus_id: str = "corpus",
) -> list[Document]:
    """Run the full preprocessing pipeline; drops documents left empty."""
    if not utterances:
        raise EmptyCorpus("no utterances to preprocess")
    documents: list[Document] = []
    for utt in utterances:
        for ordinal, sentence in enumerate(segment_sentences(utt.text, config)):
            cleaned = strip_metadata(sentence, config)
            cleaned = normalize_lexical(cleaned, config)
            cleaned = cleaned.lower()
            if not re.search(r"\w", cleaned):
                continue
            documents.append(Document(
                doc_id=f"{corpus_id}:{utt.session_id}:{utt.index}:{ordinal}",
                text=cleaned,
                corpus_id=corpus_id,
                session_id=utt.session_id,
                utterance_index=utt.index,
                sentence_ordinal=ordinal,
            ))
    if not documents:
        raise EmptyCorpus("no document survived preprocessing")
    return documents


def documents_to_jsonl(documents: list[Document]) -> str:
    lines = []
    for d in documents:
        lines.append(json.dumps({
            "doc_id": d.doc_id,
            "text": d.text,
            "corpus_id": d.corpus_id,
            "session_id": d.session_id,
            "utterance_index": d.utterance_index,
            "sentence_ordinal": d.sentence_ordinal,
        }, ensure_ascii=False))
    return "\n".join(lines) + "\n"


def documents_from_jsonl(stream: Iterable[str] | IO[str]) -> list[Document]:
    documents = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            documents.append(Document(
                doc_id=rec["doc_id"],
                text=rec["text"],
                corpus_id=rec["corpus_id"],
                session_id=rec["session_id"],
                utterance_index=rec["utterance_index"],
                sentence_ordinal=rec["sentence_ordinal"],
            ))
        except (json.JSONDecodeError, KeyError) as exc:
            raise InputFormatError(f"line {lineno}: {exc}") from exc
    return documents
