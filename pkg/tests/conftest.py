from __future__ import annotations

import numpy as np
import pytest

from ontokit.dataset import DocumentRecord, SubgraphSample
from ontokit.graph import ConceptGraph, build_concept_graph, enumerate_paths, induced_subgraph

ROOT = "Main topic classifications"

# The worked example: a document about cultural hybridity annotated with two
# concepts, whose four relevant paths at N=4 induce this subgraph.
HYBRIDITY_PATHS = (
    (ROOT, "Culture", "Sociology of culture"),
    (ROOT, "Human behavior", "Human activities", "Culture", "Sociology of culture"),
    (ROOT, "Humanities", "Politics", "Politics by issue", "Politics and race"),
    (ROOT, "Politics", "Politics by issue", "Politics and race"),
)

HYBRIDITY_CONCEPTS = ("Politics and race", "Sociology of culture")


@pytest.fixture(scope="session")
def wiki_graph() -> ConceptGraph:
    """Small category graph that contains the worked example exactly."""
    edges = set()
    for p in HYBRIDITY_PATHS:
        edges.update(zip(p, p[1:]))
    # extra branches so the example's targets stay non-trivial
    edges.update(
        {
            (ROOT, "Science"),
            ("Science", "Physics"),
            ("Culture", "Arts"),
        }
    )
    return build_concept_graph(ROOT, sorted(edges))


@pytest.fixture
def hybridity_doc() -> DocumentRecord:
    return DocumentRecord(
        id="hybridity",
        title="Hybridity",
        text="Hybridity, in its most basic sense, refers to mixture.",
        concepts=HYBRIDITY_CONCEPTS,
    )


@pytest.fixture
def hybridity_sample(wiki_graph, hybridity_doc) -> SubgraphSample:
    paths = tuple(enumerate_paths(wiki_graph, set(hybridity_doc.concepts), 4))
    return SubgraphSample(
        document=hybridity_doc,
        paths=paths,
        subgraph=induced_subgraph(paths, root=ROOT),
    )


def random_concept_graph(
    rng: np.random.Generator,
    n_nodes: int,
    n_edges: int,
    allow_self_loops: bool = False,
) -> ConceptGraph:
    labels = [f"n{i:02d}" for i in range(n_nodes)]
    edges = set()
    for _ in range(n_edges):
        a, b = rng.integers(0, n_nodes, 2)
        if a != b or allow_self_loops:
            edges.add((labels[int(a)], labels[int(b)]))
    return ConceptGraph(root=labels[0], nodes=frozenset(labels), edges=frozenset(edges))


def random_rooted_dag(rng: np.random.Generator, n_nodes: int, extra_edges: int) -> ConceptGraph:
    """Random DAG where every node is reachable from the root."""
    labels = [f"n{i:02d}" for i in range(n_nodes)]
    edges = set()
    for i in range(1, n_nodes):
        parent = int(rng.integers(0, i))
        edges.add((labels[parent], labels[i]))
    for _ in range(extra_edges):
        a, b = sorted(rng.integers(0, n_nodes, 2))
        if a != b:
            edges.add((labels[int(a)], labels[int(b)]))
    return ConceptGraph(root=labels[0], nodes=frozenset(labels), edges=frozenset(edges))
