"""Simple graph convolution: k-hop propagated node embeddings.

Label embeddings are smoothed over the undirected graph skeleton with
self-loops using the symmetric normalization S = D^{-1/2} (A + I) D^{-1/2};
the output is S^k X with rows re-normalized to unit length. No weights, no
nonlinearity: propagation only.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..embeddings import Embedder, unit_rows
from ..errors import DataError
from ..graph import ConceptGraph


def sgc_matrix(g: ConceptGraph, labels: list[str]) -> sp.csr_array:
    """The normalized propagation operator over the undirected skeleton."""
    n = len(labels)
    index = {lab: i for i, lab in enumerate(labels)}
    pairs = {(i, i) for i in range(n)}
    for a, b in g.edges:
        i, j = index[a], index[b]
        pairs.add((i, j))
        pairs.add((j, i))
    rows = np.fromiter((p[0] for p in sorted(pairs)), dtype=np.int64, count=len(pairs))
    cols = np.fromiter((p[1] for p in sorted(pairs)), dtype=np.int64, count=len(pairs))
    adj = sp.csr_array((np.ones(len(pairs)), (rows, cols)), shape=(n, n))
    inv_sqrt_deg = 1.0 / np.sqrt(adj.sum(axis=1))
    scale = sp.dia_array((inv_sqrt_deg[None, :], [0]), shape=(n, n))
    return (scale @ adj @ scale).tocsr()


def sgc_embeddings(
    g: ConceptGraph, embedder: Embedder, k: int = 2
) -> dict[str, np.ndarray]:
    """Per-node unit vectors after ``k`` propagation steps.

    ``k=0`` returns the raw label embeddings; an isolated node only ever
    sees its own self-loop, so its vector is its label embedding at any k.
    Rows that come out all-zero (labels embedded to the zero sentinel) are
    left as zero sentinels.
    """
    if k < 0:
        raise DataError(f"k must be >= 0, got {k}")
    labels = g.sorted_nodes
    feats = embedder.embed_batch(labels)
    if k > 0 and labels:
        op = sgc_matrix(g, labels)
        for _ in range(k):
            feats = op @ feats
    feats = unit_rows(feats)
    return {lab: feats[i] for i, lab in enumerate(labels)}
