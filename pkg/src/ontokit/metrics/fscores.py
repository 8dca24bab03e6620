"""The four F1-style similarity metrics between a gold and a predicted graph.

Literal compares edges by exact label equality; Fuzzy relaxes node identity
to cosine similarity above a threshold; Continuous replaces set membership
with an optimal one-to-one edge matching; Graph matches nodes on their
SGC-propagated neighbourhood embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embeddings import DEFAULT_SIMILARITY_THRESHOLD, Embedder, cosine_matrix
from ..errors import DataError
from ..graph import ConceptGraph, Edge
from .assignment import solve_assignment
from .sgc import sgc_embeddings

EdgeMatch = tuple[Edge, Edge, float]
NodeMatch = tuple[str, str, float]


@dataclass(frozen=True)
class PRF:
    """Precision/recall/F1, plus the matching score for assignment metrics.

    ``degenerate`` flags a ratio that was forced to 0 because its
    denominator (an empty edge or node set) made it undefined.
    """

    precision: float
    recall: float
    f1: float
    score: float | None = None
    degenerate: bool = False

    def to_json_dict(self) -> dict:
        doc = {"precision": self.precision, "recall": self.recall, "f1": self.f1}
        if self.score is not None:
            doc["score"] = self.score
        if self.degenerate:
            doc["degenerate"] = True
        return doc


def harmonic_f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _prf(hits_p: float, hits_r: float, n_pred: int, n_gold: int, score: float | None = None) -> PRF:
    degenerate = n_pred == 0 or n_gold == 0
    p = hits_p / n_pred if n_pred else 0.0
    r = hits_r / n_gold if n_gold else 0.0
    return PRF(precision=p, recall=r, f1=harmonic_f1(p, r), score=score, degenerate=degenerate)


def _edge_view(g: ConceptGraph, include_root: bool) -> tuple[list[str], list[Edge]]:
    if include_root:
        return g.sorted_nodes, g.sorted_edges
    nodes = [n for n in g.sorted_nodes if n != g.root]
    edges = [e for e in g.sorted_edges if g.root not in e]
    return nodes, edges


def literal_f1(gold: ConceptGraph, pred: ConceptGraph, include_root: bool = True) -> PRF:
    """Edge precision/recall under exact (case-sensitive) label equality."""
    _, gold_edges = _edge_view(gold, include_root)
    _, pred_edges = _edge_view(pred, include_root)
    inter = len(set(gold_edges) & set(pred_edges))
    return _prf(inter, inter, len(pred_edges), len(gold_edges))


def _node_similarity(
    gold_nodes: list[str], pred_nodes: list[str], embedder: Embedder
) -> np.ndarray:
    vecs = embedder.embed_batch(gold_nodes + pred_nodes)
    return cosine_matrix(vecs[: len(gold_nodes)], vecs[len(gold_nodes) :])


def fuzzy_f1(
    gold: ConceptGraph,
    pred: ConceptGraph,
    embedder: Embedder,
    t: float = DEFAULT_SIMILARITY_THRESHOLD,
    include_root: bool = True,
) -> PRF:
    """Edge match requires both endpoints strictly above the similarity threshold."""
    if not -1.0 <= t <= 1.0:
        raise DataError(f"threshold must be in [-1, 1], got {t}")
    gold_nodes, gold_edges = _edge_view(gold, include_root)
    pred_nodes, pred_edges = _edge_view(pred, include_root)
    if not gold_edges or not pred_edges:
        return _prf(0.0, 0.0, len(pred_edges), len(gold_edges))
    above = _node_similarity(gold_nodes, pred_nodes, embedder) > t
    gi = {n: i for i, n in enumerate(gold_nodes)}
    pi = {n: i for i, n in enumerate(pred_nodes)}
    gp = np.array([gi[u] for u, _ in gold_edges])
    gc = np.array([gi[v] for _, v in gold_edges])
    pp = np.array([pi[u] for u, _ in pred_edges])
    pc = np.array([pi[v] for _, v in pred_edges])
    # pair (gold edge, pred edge) matches iff parents and children both clear t
    pair = above[np.ix_(gp, pp)] & above[np.ix_(gc, pc)]
    return _prf(float(pair.any(axis=0).sum()), float(pair.any(axis=1).sum()),
                len(pred_edges), len(gold_edges))


def continuous_f1(
    gold: ConceptGraph,
    pred: ConceptGraph,
    embedder: Embedder,
    include_root: bool = True,
    use_numba: bool | None = None,
) -> tuple[PRF, list[EdgeMatch]]:
    """Best one-to-one edge matching; a pair scores the worse of its endpoint cosines."""
    gold_nodes, gold_edges = _edge_view(gold, include_root)
    pred_nodes, pred_edges = _edge_view(pred, include_root)
    if not gold_edges or not pred_edges:
        return _prf(0.0, 0.0, len(pred_edges), len(gold_edges), score=0.0), []
    sims = _node_similarity(gold_nodes, pred_nodes, embedder)
    gi = {n: i for i, n in enumerate(gold_nodes)}
    pi = {n: i for i, n in enumerate(pred_nodes)}
    gp = np.array([gi[u] for u, _ in gold_edges])
    gc = np.array([gi[v] for _, v in gold_edges])
    pp = np.array([pi[u] for u, _ in pred_edges])
    pc = np.array([pi[v] for _, v in pred_edges])
    scores = np.minimum(sims[np.ix_(gp, pp)], sims[np.ix_(gc, pc)])
    matching, total = solve_assignment(scores, use_numba=use_numba)
    matches = [(gold_edges[i], pred_edges[j], s) for i, j, s in matching]
    return _prf(total, total, len(pred_edges), len(gold_edges), score=total), matches


def graph_f1(
    gold: ConceptGraph,
    pred: ConceptGraph,
    embedder: Embedder,
    k: int = 2,
    include_root: bool = True,
    use_numba: bool | None = None,
) -> tuple[PRF, list[NodeMatch]]:
    """Best one-to-one node matching over SGC-propagated embeddings."""
    gold_nodes, _ = _edge_view(gold, include_root)
    pred_nodes, _ = _edge_view(pred, include_root)
    if not gold_nodes or not pred_nodes:
        return _prf(0.0, 0.0, len(pred_nodes), len(gold_nodes), score=0.0), []
    gold_vecs = sgc_embeddings(_view_graph(gold, include_root), embedder, k=k)
    pred_vecs = sgc_embeddings(_view_graph(pred, include_root), embedder, k=k)
    a = np.stack([gold_vecs[n] for n in gold_nodes])
    b = np.stack([pred_vecs[n] for n in pred_nodes])
    scores = cosine_matrix(a, b)
    matching, total = solve_assignment(scores, use_numba=use_numba)
    matches = [(gold_nodes[i], pred_nodes[j], s) for i, j, s in matching]
    return _prf(total, total, len(pred_nodes), len(gold_nodes), score=total), matches


def _view_graph(g: ConceptGraph, include_root: bool) -> ConceptGraph:
    """The graph as the metrics see it; root excluded means truly removed."""
    if include_root:
        return g
    nodes = g.nodes - {g.root}
    edges = frozenset(e for e in g.edges if g.root not in e)
    anchor = min(nodes) if nodes else g.root
    return ConceptGraph(root=anchor, nodes=nodes or frozenset({g.root}), edges=edges)
