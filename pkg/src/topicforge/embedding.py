"""Document embedding providers and the on-disk embedding format.

Three providers: a precomputed embedding file, an HTTP embedding service
(POST {model, texts[]} -> {vectors[][]}), and a deterministic hashing
embedder used for offline runs and tests.
"""

from __future__ import annotations

import json
import os
import re
import struct
import time
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

from .errors import (
    ChecksumMismatch,
    DimensionMismatch,
    InputFormatError,
    ProviderUnavailable,
    ZeroVector,
)
from .ingest import Document

MAGIC = b"TFEMBED1\x00\x00\x00\x00\x00\x00\x00\x00"  # 16-byte magic + version
ENDPOINT_ENV = "TOPICFORGE_EMBED_ENDPOINT"
DEFAULT_MODEL = "paraphrase-multilingual-MiniLM-L12-v2"

_TOKEN_RE = re.compile(r"[\w']+")


@dataclass(frozen=True)
class EmbeddingMatrix:
    data: np.ndarray  # (n_docs, dim) float32
    doc_ids: tuple[str, ...]
    provider_tag: str

    def __post_init__(self):
        if self.data.ndim != 2:
            raise DimensionMismatch("embedding matrix must be 2-D")
        if self.data.shape[0] != len(self.doc_ids):
            raise DimensionMismatch(
                f"{self.data.shape[0]} rows vs {len(self.doc_ids)} doc ids")
        if len(set(self.doc_ids)) != len(self.doc_ids):
            raise InputFormatError("duplicate doc ids in embedding matrix")
        if not np.all(np.isfinite(self.data)):
            raise InputFormatError("non-finite embedding values")

    @property
    def n_docs(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass
class ProviderConfig:
    kind: str = "hash"  # file | http | hash
    endpoint: str | None = None
    path: str | None = None  # kind=file
    model_name: str = DEFAULT_MODEL
    batch_size: int = 32
    timeout: float = 30.0
    hash_dim: int = 256
    seed: int = 0
    retries: int = 3

    def __post_init__(self):
        if self.kind not in ("file", "http", "hash"):
            raise InputFormatError(f"unknown provider kind {self.kind!r}")
        if self.hash_dim < 8:
            raise InputFormatError("hash_dim must be >= 8")

    def resolved_endpoint(self) -> str:
        endpoint = os.environ.get(ENDPOINT_ENV) or self.endpoint
        if not endpoint:
            raise InputFormatError("http provider requires an endpoint")
        return endpoint


def hash_embed(text: str, dim: int, seed: int = 0) -> np.ndarray:
    """Hash token uni/bi-grams into signed buckets, L2-normalized.

    Deterministic across runs and machines (crc32-based hashing, no
    process-randomized ``hash()``).
    """
    if dim < 8:
        raise InputFormatError("dim must be >= 8")
    tokens = _TOKEN_RE.findall(text.lower())
    vec = np.zeros(dim, dtype=np.float64)
    grams = tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
    for gram in grams:
        h = zlib.crc32(f"{seed}\x00{gram}".encode("utf-8"))
        bucket = h % dim
        sign = 1.0 if (h >> 31) & 1 == 0 else -1.0
        vec[bucket] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    else:
        # empty/degenerate text still needs a valid unit row
        vec[zlib.crc32(f"{seed}".encode()) % dim] = 1.0
    return vec.astype(np.float32)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine of zero-norm vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def save_embedding_file(matrix: EmbeddingMatrix, path: str | Path) -> None:
    """Binary format: magic, u64 n, u64 dim, n*dim LE float32, CRC32.

    A JSON sidecar (``<path>.json``) carries doc_ids and provider_tag.
    """
    path = Path(path)
    data = np.ascontiguousarray(matrix.data, dtype="<f4")
    payload = data.tobytes()
    header = MAGIC + struct.pack("<QQ", matrix.n_docs, matrix.dim)
    crc = zlib.crc32(header + payload)
    path.write_bytes(header + payload + struct.pack("<I", crc))
    sidecar = {"doc_ids": list(matrix.doc_ids), "provider_tag": matrix.provider_tag}
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, ensure_ascii=False), "utf-8")


def load_embedding_file(path: str | Path) -> EmbeddingMatrix:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < len(MAGIC) + 16 + 4 or raw[: len(MAGIC)] != MAGIC:
        raise InputFormatError(f"{path}: bad embedding file header")
    n, dim = struct.unpack_from("<QQ", raw, len(MAGIC))
    offset = len(MAGIC) + 16
    expected = offset + n * dim * 4 + 4
    if len(raw) != expected:
        raise InputFormatError(
            f"{path}: expected {expected} bytes for n={n} dim={dim}, got {len(raw)}")
    (crc,) = struct.unpack_from("<I", raw, len(raw) - 4)
    if zlib.crc32(raw[:-4]) != crc:
        raise ChecksumMismatch(f"{path}: CRC mismatch")
    data = np.frombuffer(raw[offset:-4], dtype="<f4").reshape(n, dim).copy()
    sidecar_path = path.with_suffix(path.suffix + ".json")
    if not sidecar_path.exists():
        raise InputFormatError(f"{sidecar_path}: missing sidecar")
    sidecar = json.loads(sidecar_path.read_text("utf-8"))
    return EmbeddingMatrix(
        data=data,
        doc_ids=tuple(sidecar["doc_ids"]),
        provider_tag=sidecar.get("provider_tag", ""),
    )


def _http_embed(texts: list[str], config: ProviderConfig) -> list[list[float]]:
    endpoint = config.resolved_endpoint()
    vectors: list[list[float]] = []
    for start in range(0, len(texts), config.batch_size):
        batch = texts[start:start + config.batch_size]
        payload = {"model": config.model_name, "texts": batch}
        last_exc: Exception | None = None
        for attempt in range(config.retries):
            try:
                resp = requests.post(endpoint, json=payload, timeout=config.timeout)
                resp.raise_for_status()
                vectors.extend(resp.json()["vectors"])
                last_exc = None
                break
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_exc = exc
                time.sleep(min(2.0 ** attempt * 0.1, 2.0))
        if last_exc is not None:
            raise ProviderUnavailable(
                f"embedding service at {endpoint} failed after "
                f"{config.retries} attempts: {last_exc}") from last_exc
    return vectors


def embed_documents(docs: list[Document], config: ProviderConfig) -> EmbeddingMatrix:
    """Embed documents in input order via the configured provider."""
    if not docs:
        raise InputFormatError("no documents to embed")
    doc_ids = tuple(d.doc_id for d in docs)
    if config.kind == "hash":
        rows = [hash_embed(d.text, config.hash_dim, config.seed) for d in docs]
        data = np.vstack(rows)
        tag = f"hash-{config.hash_dim}-seed{config.seed}"
    elif config.kind == "file":
        if not config.path:
            raise InputFormatError("file provider requires a path")
        matrix = load_embedding_file(config.path)
        if matrix.doc_ids != doc_ids:
            raise DimensionMismatch(
                f"embedding file covers {matrix.n_docs} docs, "
                f"corpus has {len(docs)} (or ids differ)")
        return matrix
    else:  # http
        vectors = _http_embed([d.text for d in docs], config)
        if len(vectors) != len(docs):
            raise DimensionMismatch(
                f"service returned {len(vectors)} vectors for {len(docs)} docs")
        widths = {len(v) for v in vectors}
        if len(widths) != 1:
            raise DimensionMismatch(f"service returned mixed row widths {sorted(widths)}")
        data = np.asarray(vectors, dtype=np.float32)
        tag = config.model_name
    return EmbeddingMatrix(data=data, doc_ids=doc_ids, provider_tag=tag)
