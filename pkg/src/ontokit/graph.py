"""Rooted concept graphs and weighted relation graphs.

This is the data model every other stage shares. Node identity is exact
string equality of labels: nothing in here folds case or trims whitespace.
Graphs are immutable after construction, so they can be read concurrently
from any number of workers.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path as FsPath
from typing import Iterable, Mapping, Sequence

from ._fileio import write_json_atomic
from .errors import DataError

logger = logging.getLogger(__name__)

Edge = tuple[str, str]
# A path is a label sequence whose first element is the root and whose
# consecutive pairs are edges of the graph it was extracted from.
Path = tuple[str, ...]


@dataclass(frozen=True)
class ConceptGraph:
    """Rooted labelled directed graph. Cycles are permitted."""

    root: str
    nodes: frozenset[str]
    edges: frozenset[Edge]

    def __post_init__(self) -> None:
        if self.root not in self.nodes:
            raise DataError(f"root {self.root!r} is not in the node set")
        for u, v in self.edges:
            if u not in self.nodes or v not in self.nodes:
                raise DataError(f"edge endpoint not in node set: ({u!r}, {v!r})")

    @classmethod
    def from_edges(
        cls, root: str, edges: Iterable[Edge], extra_nodes: Iterable[str] = ()
    ) -> "ConceptGraph":
        edge_set = frozenset((str(u), str(v)) for u, v in edges)
        nodes = {root}
        nodes.update(extra_nodes)
        for u, v in edge_set:
            nodes.add(u)
            nodes.add(v)
        return cls(root=root, nodes=frozenset(nodes), edges=edge_set)

    @cached_property
    def children(self) -> dict[str, tuple[str, ...]]:
        """Successors per node, sorted for deterministic traversal."""
        out: dict[str, list[str]] = {}
        for u, v in self.edges:
            out.setdefault(u, []).append(v)
        return {u: tuple(sorted(vs)) for u, vs in out.items()}

    @cached_property
    def parents(self) -> dict[str, tuple[str, ...]]:
        inc: dict[str, list[str]] = {}
        for u, v in self.edges:
            inc.setdefault(v, []).append(u)
        return {v: tuple(sorted(us)) for v, us in inc.items()}

    def successors(self, label: str) -> tuple[str, ...]:
        return self.children.get(label, ())

    @property
    def sorted_nodes(self) -> list[str]:
        return sorted(self.nodes)

    @property
    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def distances_from(self, sources: Iterable[str]) -> dict[str, int]:
        """Directed BFS distance from the nearest of ``sources``."""
        dist = {s: 0 for s in sources if s in self.nodes}
        frontier = list(dist)
        while frontier:
            nxt = []
            for u in frontier:
                for v in self.successors(u):
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        return dist

    def root_eccentricity(self) -> int:
        """Largest finite BFS distance from the root; unreachable nodes are ignored."""
        dist = self.distances_from([self.root])
        return max(dist.values(), default=0)

    def to_json_dict(self) -> dict:
        doc: dict = {"root": self.root, "edges": [list(e) for e in self.sorted_edges]}
        touched = {self.root}
        for u, v in self.edges:
            touched.add(u)
            touched.add(v)
        isolated = sorted(self.nodes - touched)
        if isolated:
            doc["nodes"] = isolated
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ConceptGraph":
        try:
            root = doc["root"]
            edges = [(u, v) for u, v in doc["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed graph document: {exc}") from exc
        return cls.from_edges(root, edges, extra_nodes=doc.get("nodes", ()))

    def save(self, path: str | FsPath) -> None:
        write_json_atomic(path, self.to_json_dict())


@dataclass(frozen=True)
class WeightedGraph:
    """Directed graph with positive integer edge weights (occurrence counts)."""

    nodes: frozenset[str]
    weights: Mapping[Edge, int]

    def __post_init__(self) -> None:
        for (u, v), w in self.weights.items():
            if w < 1:
                raise DataError(f"edge ({u!r}, {v!r}) has non-positive weight {w}")
            if u not in self.nodes or v not in self.nodes:
                raise DataError(f"edge endpoint not in node set: ({u!r}, {v!r})")

    @classmethod
    def from_weights(
        cls, weights: Mapping[Edge, int], extra_nodes: Iterable[str] = ()
    ) -> "WeightedGraph":
        nodes = set(extra_nodes)
        for u, v in weights:
            nodes.add(u)
            nodes.add(v)
        return cls(nodes=frozenset(nodes), weights=dict(weights))

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(self.weights)

    @property
    def sorted_edges(self) -> list[Edge]:
        return sorted(self.weights)

    def out_edges(self, u: str) -> list[tuple[str, int]]:
        return [(v, w) for (p, v), w in self.weights.items() if p == u]

    def to_json_dict(self) -> dict:
        edges = self.sorted_edges
        doc: dict = {
            "edges": [list(e) for e in edges],
            "weights": [self.weights[e] for e in edges],
        }
        touched = set()
        for u, v in edges:
            touched.add(u)
            touched.add(v)
        isolated = sorted(self.nodes - touched)
        if isolated:
            doc["nodes"] = isolated
        return doc

    @classmethod
    def from_json_dict(cls, doc: dict) -> "WeightedGraph":
        try:
            edges = [(u, v) for u, v in doc["edges"]]
            weights = [int(w) for w in doc["weights"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed weighted graph document: {exc}") from exc
        if len(edges) != len(weights):
            raise DataError("edges and weights arrays differ in length")
        return cls.from_weights(dict(zip(edges, weights)), extra_nodes=doc.get("nodes", ()))

    def save(self, path: str | FsPath) -> None:
        write_json_atomic(path, self.to_json_dict())


def build_concept_graph(root: str, edge_list: Sequence[Edge]) -> ConceptGraph:
    """Build a rooted graph from an edge list, deduplicating repeats.

    The root may be absent from the edge endpoints (it ends up isolated);
    that is almost always a data problem, so it is flagged with a warning
    rather than an error.
    """
    if not edge_list:
        raise DataError("edge list is empty")
    g = ConceptGraph.from_edges(root, edge_list)
    endpoints = {n for e in g.edges for n in e}
    if root not in endpoints:
        logger.warning("root %r does not appear in any edge; it will be isolated", root)
    return g


def enumerate_paths(g: ConceptGraph, targets: Iterable[str], n_max: int) -> list[Path]:
    """All simple root-to-target paths with at most ``n_max`` edges.

    Output order is lexicographic by label sequence (a DFS that visits
    children in sorted order emits exactly that order). Targets missing
    from the graph are skipped with a diagnostic instead of failing the
    whole batch.
    """
    if n_max < 0:
        raise DataError(f"n_max must be non-negative, got {n_max}")
    wanted = set(targets)
    missing = wanted - g.nodes
    if missing:
        logger.warning("skipping %d target(s) not in graph: %s", len(missing), sorted(missing)[:5])
        wanted -= missing
    if not wanted:
        return []

    found: list[Path] = []
    path: list[str] = [g.root]
    on_path = {g.root}

    def visit(node: str) -> None:
        if node in wanted:
            found.append(tuple(path))
        if len(path) - 1 >= n_max:
            return
        for child in g.successors(node):
            if child in on_path:
                continue
            path.append(child)
            on_path.add(child)
            visit(child)
            path.pop()
            on_path.remove(child)

    visit(g.root)
    return found


def induced_subgraph(paths: Sequence[Path], root: str | None = None) -> ConceptGraph:
    """Union of the nodes and consecutive pairs occurring in ``paths``.

    All paths must share the same first label. An empty path list yields the
    graph containing only ``root``, which must then be given explicitly.
    """
    if not paths:
        if root is None:
            raise DataError("empty path list and no explicit root")
        return ConceptGraph(root=root, nodes=frozenset({root}), edges=frozenset())
    first = paths[0][0]
    if root is not None and root != first:
        raise DataError(f"paths start at {first!r}, expected root {root!r}")
    nodes: set[str] = set()
    edges: set[Edge] = set()
    for p in paths:
        if p[0] != first:
            raise DataError(f"paths do not share a common root: {p[0]!r} != {first!r}")
        nodes.update(p)
        edges.update(zip(p, p[1:]))
    return ConceptGraph(root=first, nodes=frozenset(nodes), edges=frozenset(edges))


def check_path(g: ConceptGraph, path: Path, n_max: int | None = None) -> None:
    """Raise DataError unless ``path`` satisfies the path invariants for ``g``."""
    if not path:
        raise DataError("empty path")
    if path[0] != g.root:
        raise DataError(f"path starts at {path[0]!r}, not the root {g.root!r}")
    if len(set(path)) != len(path):
        raise DataError(f"path repeats a label: {path}")
    for u, v in zip(path, path[1:]):
        if (u, v) not in g.edges:
            raise DataError(f"path uses non-edge ({u!r}, {v!r})")
    if n_max is not None and len(path) - 1 > n_max:
        raise DataError(f"path has {len(path) - 1} edges, exceeding n_max={n_max}")


def load_graph_json(path: str | FsPath) -> ConceptGraph:
    with open(path, encoding="utf-8") as fh:
        return ConceptGraph.from_json_dict(json.load(fh))


def load_weighted_json(path: str | FsPath) -> WeightedGraph:
    with open(path, encoding="utf-8") as fh:
        return WeightedGraph.from_json_dict(json.load(fh))


def load_graph_tsv(path: str | FsPath, root: str | None = None) -> ConceptGraph:
    """Two-column parent/child TSV, as distributed for gold ontologies.

    When ``root`` is not given it must be inferable as the unique node with
    no incoming edge.
    """
    edges: list[Edge] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected two tab-separated columns")
            edges.append((parts[0], parts[1]))
    if not edges:
        raise DataError(f"{path}: no edges")
    if root is None:
        children = {v for _, v in edges}
        roots = sorted({u for u, _ in edges} - children)
        if len(roots) != 1:
            raise DataError(
                f"{path}: cannot infer root (candidates: {roots[:5]}); pass it explicitly"
            )
        root = roots[0]
    return build_concept_graph(root, edges)


def load_graph(path: str | FsPath, root: str | None = None) -> ConceptGraph:
    """Dispatch on extension: ``.tsv`` for gold TSVs, JSON otherwise."""
    if str(path).endswith((".tsv", ".txt")):
        return load_graph_tsv(path, root=root)
    return load_graph_json(path)
