"""Text-embedding providers and cosine utilities.

Three interchangeable backends: a deterministic hash embedder (runs with no
model, used throughout the test suite), an HTTP client for the embedding
microservice, and a JSONL file cache that can wrap either or serve alone.
All backends return unit-normalized float64 vectors; the empty string embeds
to an all-zero sentinel that matches nothing.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path as FsPath
from typing import Sequence

import numpy as np
import requests

from .errors import DataError, NetworkError

logger = logging.getLogger(__name__)

# Cosine-similarity threshold for fuzzy node matching: the published median
# similarity between known synonym pairs under the reference encoder.
DEFAULT_SIMILARITY_THRESHOLD = 0.436

_NORM_TOL = 1e-12


def unit_rows(mat: np.ndarray) -> np.ndarray:
    """Normalize rows to unit length; near-zero rows become exact zeros."""
    mat = np.asarray(mat, dtype=np.float64)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    out = np.divide(mat, norms, out=np.zeros_like(mat), where=norms > _NORM_TOL)
    return out


def nodesim(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two unit vectors, clamped to [-1, 1].

    Zero-sentinel vectors (empty text) are defined to match nothing and
    score -1 against everything, including each other.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DataError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if np.linalg.norm(a) <= _NORM_TOL or np.linalg.norm(b) <= _NORM_TOL:
        return -1.0
    return float(np.clip(np.dot(a, b), -1.0, 1.0))


def cosine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise cosine of unit row matrices; zero rows score -1 everywhere."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[1] != b.shape[1]:
        raise DataError(f"dimension mismatch: {a.shape} vs {b.shape}")
    sims = np.clip(a @ b.T, -1.0, 1.0)
    a_zero = np.linalg.norm(a, axis=1) <= _NORM_TOL
    b_zero = np.linalg.norm(b, axis=1) <= _NORM_TOL
    sims[a_zero, :] = -1.0
    sims[:, b_zero] = -1.0
    return sims


class Embedder(ABC):
    """Shared memoization and normalization for every backend.

    ``embed_batch`` never returns different vectors for the same text within
    one instance; misses are batched to the backend in first-seen order.
    """

    model: str = "unknown"

    def __init__(self) -> None:
        self._memo: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    @abstractmethod
    def _embed_many(self, texts: list[str]) -> np.ndarray:
        """Return one row per text; rows need not be normalized yet."""

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        with self._lock:
            misses = [t for t in dict.fromkeys(texts) if t != "" and t not in self._memo]
            if misses:
                rows = unit_rows(self._embed_many(misses))
                if rows.shape[0] != len(misses):
                    raise DataError(
                        f"backend returned {rows.shape[0]} vectors for {len(misses)} texts"
                    )
                for t, row in zip(misses, rows):
                    self._memo[t] = row
            if not texts:
                return np.empty((0, self.dim or 0))
            # empty text embeds to the zero sentinel in the current dimension
            zero = np.zeros(self.dim or 1, dtype=np.float64)
            return np.stack([self._memo[t] if t != "" else zero for t in texts])

    @property
    def dim(self) -> int | None:
        for v in self._memo.values():
            if v.size:
                return int(v.shape[0])
        return None


class DeterministicEmbedder(Embedder):
    """Seeded hash embedder: identical strings map to identical unit vectors,
    distinct strings are near-orthogonal in expectation for large dimensions.

    A synonym table can force chosen pairs to a fixed similarity, which is
    how tests stage fuzzy matches without a real model.
    """

    def __init__(self, dim: int = 512, seed: int = 0) -> None:
        super().__init__()
        if dim < 2:
            raise DataError(f"dim must be >= 2, got {dim}")
        self._dim = dim
        self._seed = seed
        self._synonyms: dict[str, tuple[str, float]] = {}
        self.model = f"test:dim={dim},seed={seed}"

    def register_synonyms(self, canonical: str, synonym: str, similarity: float = 0.8) -> None:
        """Pin cos(synonym, canonical) to ``similarity`` exactly."""
        if not -1.0 <= similarity <= 1.0:
            raise DataError(f"similarity must be in [-1, 1], got {similarity}")
        with self._lock:
            self._synonyms[synonym] = (canonical, similarity)
            self._memo.pop(synonym, None)

    def _base_vector(self, text: str) -> np.ndarray:
        digest = hashlib.blake2b(
            f"{self._seed}\x00{text}".encode("utf-8"), digest_size=16
        ).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "big"))
        v = rng.standard_normal(self._dim)
        return v / np.linalg.norm(v)

    def _vector(self, text: str, _seen: frozenset[str] = frozenset()) -> np.ndarray:
        entry = self._synonyms.get(text)
        if entry is None:
            return self._base_vector(text)
        if text in _seen:
            raise DataError(f"synonym registrations form a cycle through {text!r}")
        canonical, s = entry
        anchor = self._vector(canonical, _seen | {text})
        raw = self._base_vector(text)
        resid = raw - np.dot(raw, anchor) * anchor
        norm = np.linalg.norm(resid)
        if norm <= _NORM_TOL:  # pragma: no cover - needs a hash collision
            resid = np.zeros(self._dim)
            resid[int(np.argmin(np.abs(anchor)))] = 1.0
            resid -= np.dot(resid, anchor) * anchor
            norm = np.linalg.norm(resid)
        return s * anchor + np.sqrt(max(1.0 - s * s, 0.0)) * resid / norm

    def _embed_many(self, texts: list[str]) -> np.ndarray:
        return np.stack([self._vector(t) for t in texts])

    @property
    def dim(self) -> int:
        return self._dim


class HttpEmbedder(Embedder):
    """Client for the embedding microservice (POST /embed).

    Large inputs are split into ``batch_size`` chunks, issued with at most
    ``parallel_requests`` in flight at once.
    """

    def __init__(
        self,
        url: str,
        batch_size: int = 256,
        parallel_requests: int = 4,
        timeout: float = 120.0,
        retries: int = 3,
        backoff: float = 1.0,
        session: requests.Session | None = None,
    ) -> None:
        super().__init__()
        self.url = url.rstrip("/")
        self.batch_size = batch_size
        self.parallel_requests = max(1, parallel_requests)
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.session = session or requests.Session()
        self.model = url

    def _post_batch(self, texts: list[str]) -> np.ndarray:
        last: Exception | None = None
        for attempt in range(self.retries):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self.session.post(
                    f"{self.url}/embed", json={"texts": texts}, timeout=self.timeout
                )
                resp.raise_for_status()
                doc = resp.json()
                self.model = str(doc.get("model", self.model))
                return np.asarray(doc["vectors"], dtype=np.float64)
            except (requests.RequestException, ValueError, KeyError) as exc:
                last = exc
                logger.warning("embed request failed (attempt %d): %s", attempt + 1, exc)
        raise NetworkError(f"embedding service {self.url} failed after {self.retries} tries: {last}")

    def _embed_many(self, texts: list[str]) -> np.ndarray:
        batches = [texts[i : i + self.batch_size] for i in range(0, len(texts), self.batch_size)]
        if len(batches) > 1 and self.parallel_requests > 1:
            with ThreadPoolExecutor(max_workers=self.parallel_requests) as pool:
                chunks = list(pool.map(self._post_batch, batches))
        else:
            chunks = [self._post_batch(b) for b in batches]
        return np.vstack(chunks)


class FileCachedEmbedder(Embedder):
    """JSONL-file cache keyed by (model, exact text), wrapping an optional backend.

    Entries computed through the backend are appended immediately, so a
    failed batch leaves everything computed so far resumable on disk. With no
    backend the cache is read-only and unknown texts are an error.
    """

    def __init__(self, path: str | FsPath, base: Embedder | None = None, model: str | None = None):
        super().__init__()
        self.path = FsPath(path)
        self.base = base
        self.model = model or (base.model if base else "cache")
        if self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    if not line.strip():
                        continue
                    try:
                        doc = json.loads(line)
                        if doc["model"] != self.model:
                            continue
                        vec = np.asarray(doc["vec"], dtype=np.float64)
                        # same normalization pass the base class applies, so a
                        # reloaded vector is bit-identical to the one served
                        # when it was first computed
                        self._memo[str(doc["text"])] = unit_rows(vec[None, :])[0]
                    except (json.JSONDecodeError, KeyError, TypeError) as exc:
                        raise DataError(f"{path}:{lineno}: malformed cache entry ({exc})") from exc

    def _embed_many(self, texts: list[str]) -> np.ndarray:
        if self.base is None:
            raise DataError(
                f"{len(texts)} text(s) missing from read-only embedding cache {self.path}"
            )
        rows = self.base.embed_batch(texts)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            for t, row in zip(texts, rows):
                fh.write(
                    json.dumps(
                        {"text": t, "model": self.model, "vec": row.tolist()},
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        return rows


def open_embedder(spec: str, cache: str | None = None) -> Embedder:
    """Build an embedder from a CLI config string.

    ``test`` or ``test:dim=256,seed=3`` gives the deterministic embedder;
    an ``http(s)://`` URL gives the service client. ``cache`` wraps the
    result in a file cache (or opens the cache read-only when spec is
    ``cache``).
    """
    spec = spec.strip()
    base: Embedder | None
    if spec == "cache":
        base = None
    elif spec.startswith(("http://", "https://")):
        base = HttpEmbedder(spec)
    elif spec == "test" or spec.startswith("test:"):
        kwargs: dict[str, int] = {}
        if ":" in spec:
            for item in spec.split(":", 1)[1].split(","):
                if not item:
                    continue
                key, _, val = item.partition("=")
                if key not in ("dim", "seed"):
                    raise DataError(f"unknown test-embedder option {key!r}")
                kwargs[key] = int(val)
        base = DeterministicEmbedder(**kwargs)
    else:
        raise DataError(f"unrecognized embedder spec {spec!r}")
    if cache is not None:
        return FileCachedEmbedder(cache, base=base)
    if base is None:
        raise DataError("embedder spec 'cache' requires a cache path")
    return base
