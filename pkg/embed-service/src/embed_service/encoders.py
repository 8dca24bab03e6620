"""Encoder backends for the embedding service.

The default backend wraps a pretrained sentence transformer
(all-MiniLM-L6-v2 unless configured otherwise). A ``hash:<dim>`` spec
selects a deterministic seeded-hash encoder that needs no model files,
which is what the test suite and offline deployments use.
"""

from __future__ import annotations

import hashlib

import numpy as np


class HashEncoder:
    """Deterministic unit vectors derived from a hash of the text."""

    def __init__(self, dim: int = 384):
        if dim < 2:
            raise ValueError(f"dim must be >= 2, got {dim}")
        self.dim = dim
        self.model_name = f"hash:{dim}"

    def encode(self, texts: list[str]) -> np.ndarray:
        rows = []
        for text in texts:
            digest = hashlib.blake2b(text.encode("utf-8"), digest_size=16).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "big"))
            v = rng.standard_normal(self.dim)
            rows.append(v / np.linalg.norm(v))
        return np.stack(rows)


class TransformerEncoder:
    """sentence-transformers backend; inference runs in evaluation mode."""

    def __init__(self, model_name: str):
        from sentence_transformers import SentenceTransformer

        self.model_name = model_name
        self._model = SentenceTransformer(model_name)
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: list[str]) -> np.ndarray:
        vectors = self._model.encode(
            texts,
            convert_to_numpy=True,
            normalize_embeddings=True,
            show_progress_bar=False,
        )
        return np.asarray(vectors, dtype=np.float64)


def load_encoder(spec: str):
    if spec.startswith("hash:"):
        return HashEncoder(dim=int(spec.split(":", 1)[1]))
    if spec == "hash":
        return HashEncoder()
    return TransformerEncoder(spec)
