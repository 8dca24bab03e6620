"""Sum generated subgraphs into a weighted graph and prune it.

The pruning pipeline applies, in order: self-loop removal, inverse-edge
removal, absolute weight thresholding (quantile), relative per-node
thresholding (top-p style), and isolated-node cleanup. A greedy cycle
breaker is available as an optional extra step.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from .errors import DataError
from .graph import ConceptGraph, Edge, WeightedGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PruneConfig:
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise DataError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise DataError(f"beta must be in [0, 1], got {self.beta}")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "PruneConfig":
        try:
            return cls(alpha=float(doc["alpha"]), beta=float(doc["beta"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed prune config: {exc}") from exc


@dataclass
class PruneReport:
    """Edges removed by each pipeline step, for the JSON report."""

    self_loops: list[Edge] = field(default_factory=list)
    inverse: list[Edge] = field(default_factory=list)
    absolute: list[Edge] = field(default_factory=list)
    relative: list[Edge] = field(default_factory=list)
    isolated_nodes: list[str] = field(default_factory=list)
    alpha_quantile: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "self_loops": {"count": len(self.self_loops), "edges": [list(e) for e in self.self_loops]},
            "inverse": {"count": len(self.inverse), "edges": [list(e) for e in self.inverse]},
            "absolute": {
                "count": len(self.absolute),
                "quantile": self.alpha_quantile,
                "edges": [list(e) for e in self.absolute],
            },
            "relative": {"count": len(self.relative), "edges": [list(e) for e in self.relative]},
            "isolated_nodes": {"count": len(self.isolated_nodes), "nodes": self.isolated_nodes},
        }


def sum_subgraphs(subgraphs: Sequence[ConceptGraph]) -> WeightedGraph:
    """Union the subgraphs; each edge is weighted by how many contain it."""
    if not subgraphs:
        raise DataError("no subgraphs to sum")
    weights: Counter = Counter()
    nodes: set[str] = set()
    for g in subgraphs:
        nodes.update(g.nodes)
        weights.update(g.edges)
    return WeightedGraph(nodes=frozenset(nodes), weights=dict(weights))


def prune_self_loops(g: WeightedGraph, report: PruneReport | None = None) -> WeightedGraph:
    kept = {e: w for e, w in g.weights.items() if e[0] != e[1]}
    if report is not None:
        report.self_loops = sorted(e for e in g.weights if e[0] == e[1])
    return WeightedGraph(nodes=g.nodes, weights=kept)


def prune_inverse_edges(g: WeightedGraph, report: PruneReport | None = None) -> WeightedGraph:
    """Drop the strictly lighter direction of every bidirectional pair.

    Equal weights keep both directions: the removal condition is a strict
    inequality.
    """
    removed = {
        (u, v)
        for (u, v), w in g.weights.items()
        if g.weights.get((v, u), 0) > w
    }
    if report is not None:
        report.inverse = sorted(removed)
    return WeightedGraph(
        nodes=g.nodes, weights={e: w for e, w in g.weights.items() if e not in removed}
    )


def weight_quantile(weights: Sequence[int], alpha: float) -> float:
    """Alpha-quantile of the weight multiset, linear interpolation between order stats."""
    return float(np.quantile(np.asarray(weights, dtype=float), alpha))


def absolute_threshold(
    g: WeightedGraph, alpha: float, report: PruneReport | None = None
) -> WeightedGraph:
    """Remove edges with weight strictly below the alpha-quantile of all weights."""
    if not 0.0 <= alpha <= 1.0:
        raise DataError(f"alpha must be in [0, 1], got {alpha}")
    if not g.weights:
        return g
    cut = weight_quantile(list(g.weights.values()), alpha)
    kept = {e: w for e, w in g.weights.items() if w >= cut}
    if report is not None:
        report.absolute = sorted(e for e, w in g.weights.items() if w < cut)
        report.alpha_quantile = cut
    return WeightedGraph(nodes=g.nodes, weights=kept)


def relative_threshold(
    g: WeightedGraph, beta: float, report: PruneReport | None = None
) -> WeightedGraph:
    """Per node, prune the lightest outgoing edges up to a cumulative-mass cut.

    Outgoing edges are sorted ascending by weight (ties by child label);
    an edge is pruned when its cumulative weight fraction C(e) <= beta.
    """
    if not 0.0 <= beta <= 1.0:
        raise DataError(f"beta must be in [0, 1], got {beta}")
    by_parent: dict[str, list[tuple[int, str]]] = {}
    for (u, v), w in g.weights.items():
        by_parent.setdefault(u, []).append((w, v))
    removed: set[Edge] = set()
    for u, out in by_parent.items():
        out.sort()
        total = sum(w for w, _ in out)
        cum = 0
        for w, v in out:
            cum += w
            if cum / total <= beta:
                removed.add((u, v))
            else:
                break
    if report is not None:
        report.relative = sorted(removed)
    return WeightedGraph(
        nodes=g.nodes, weights={e: w for e, w in g.weights.items() if e not in removed}
    )


def cleanup_isolated(g: WeightedGraph, report: PruneReport | None = None) -> WeightedGraph:
    touched = {n for e in g.weights for n in e}
    if report is not None:
        report.isolated_nodes = sorted(g.nodes - touched)
    return WeightedGraph(nodes=frozenset(touched), weights=dict(g.weights))


def prune_weighted(raw: WeightedGraph, cfg: PruneConfig) -> tuple[WeightedGraph, PruneReport]:
    """The five pruning steps in pipeline order, with a removal report."""
    report = PruneReport()
    g = prune_self_loops(raw, report)
    g = prune_inverse_edges(g, report)
    g = absolute_threshold(g, cfg.alpha, report)
    g = relative_threshold(g, cfg.beta, report)
    g = cleanup_isolated(g, report)
    return g, report


def finalize_concept_graph(g: WeightedGraph, root: str) -> ConceptGraph:
    """Drop weights and re-root. The root survives pruning even when isolated."""
    if root not in g.nodes:
        logger.warning("root %r was pruned away entirely; keeping it isolated", root)
    return ConceptGraph(
        root=root, nodes=frozenset(g.nodes | {root}), edges=frozenset(g.weights)
    )


def post_process(
    subgraphs: Sequence[ConceptGraph], cfg: PruneConfig, root: str | None = None
) -> ConceptGraph:
    """Sum, prune, and return the final rooted concept graph."""
    raw = sum_subgraphs(subgraphs)
    if root is None:
        root = subgraphs[0].root
    pruned, _ = prune_weighted(raw, cfg)
    return finalize_concept_graph(pruned, root)


def _cycle_edges(cycle: list[str]) -> list[Edge]:
    return [(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))]


def remove_cycles_greedy(
    g: ConceptGraph,
    cycle_cap: int = 100_000,
    weights: Mapping[Edge, int] | None = None,
) -> tuple[ConceptGraph, list[Edge]]:
    """Repeatedly delete the edge sitting on the most simple cycles.

    Simple cycles are enumerated (Johnson's algorithm via networkx) up to
    ``cycle_cap``; if the cap truncates the enumeration, the loop re-verifies
    acyclicity and goes again, so the result is always acyclic. Ties are
    broken by lowest weight (when weights are available), then by
    lexicographically smallest edge. This is a heuristic for the minimum
    feedback arc set, not an exact solver.
    """
    edges = set(g.edges)
    removed: list[Edge] = []
    while True:
        dg = nx.DiGraph(edges)
        dg.add_nodes_from(g.nodes)
        if nx.is_directed_acyclic_graph(dg):
            break
        cycles: list[list[Edge]] = []
        for i, cyc in enumerate(nx.simple_cycles(dg)):
            if i >= cycle_cap:
                logger.warning("cycle cap %d reached; proceeding on the enumerated subset", cycle_cap)
                break
            cycles.append(_cycle_edges(cyc))
        while cycles:
            membership: Counter = Counter()
            for cyc in cycles:
                membership.update(cyc)
            top = max(membership.values())
            candidates = [e for e, c in membership.items() if c == top]
            if weights:
                lightest = min(weights.get(e, 1) for e in candidates)
                candidates = [e for e in candidates if weights.get(e, 1) == lightest]
            victim = min(candidates)
            edges.discard(victim)
            removed.append(victim)
            cycles = [cyc for cyc in cycles if victim not in cyc]
    return (
        ConceptGraph(root=g.root, nodes=g.nodes, edges=frozenset(edges)),
        removed,
    )
