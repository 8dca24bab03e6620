from __future__ import annotations

import numpy as np
import pytest

from conftest import random_concept_graph
from oracles import best_injective_matching, sgc_dense
from ontokit.embeddings import DeterministicEmbedder
from ontokit.graph import ConceptGraph, build_concept_graph
from ontokit.metrics.fscores import continuous_f1, fuzzy_f1, graph_f1, harmonic_f1, literal_f1


@pytest.fixture
def embedder():
    return DeterministicEmbedder(dim=256, seed=0)


@pytest.fixture
def synonym_pair(embedder):
    """gold A->B versus pred with edges (A,B) and (A,B'), where B ~ B'."""
    embedder.register_synonyms("B", "B-alt", similarity=0.8)
    gold = build_concept_graph("A", [("A", "B")])
    pred = build_concept_graph("A", [("A", "B"), ("A", "B-alt")])
    return gold, pred


class TestLiteralF1:
    def test_identical(self, wiki_graph):
        prf = literal_f1(wiki_graph, wiki_graph)
        assert (prf.precision, prf.recall, prf.f1) == (1.0, 1.0, 1.0)

    def test_half_recall(self):
        gold = build_concept_graph("A", [("A", "B"), ("A", "C")])
        pred = build_concept_graph("A", [("A", "B")])
        prf = literal_f1(gold, pred)
        assert prf.precision == 1.0
        assert prf.recall == 0.5
        assert prf.f1 == pytest.approx(2 / 3)

    def test_case_sensitive(self):
        gold = build_concept_graph("a", [("a", "b")])
        pred = build_concept_graph("A", [("A", "B")])
        assert literal_f1(gold, pred).f1 == 0.0

    def test_empty_side_flagged(self):
        gold = build_concept_graph("A", [("A", "B")])
        pred = ConceptGraph(root="A", nodes=frozenset({"A"}), edges=frozenset())
        prf = literal_f1(gold, pred)
        assert prf.f1 == 0.0
        assert prf.degenerate


class TestFuzzyF1:
    def test_identical(self, wiki_graph, embedder):
        assert fuzzy_f1(wiki_graph, wiki_graph, embedder).f1 == 1.0

    def test_synonym_fixture_is_perfect(self, synonym_pair, embedder):
        gold, pred = synonym_pair
        prf = fuzzy_f1(gold, pred, embedder, t=0.436)
        assert prf.f1 == 1.0

    def test_all_below_threshold(self, embedder):
        gold = build_concept_graph("g1", [("g1", "g2")])
        pred = build_concept_graph("p1", [("p1", "p2")])
        assert fuzzy_f1(gold, pred, embedder, t=0.436).f1 == 0.0

    def test_threshold_is_strict(self, embedder):
        embedder.register_synonyms("X", "X-syn", similarity=0.75)
        gold = build_concept_graph("A", [("A", "X")])
        pred = build_concept_graph("A", [("A", "X-syn")])
        assert fuzzy_f1(gold, pred, embedder, t=0.75).f1 == 0.0
        assert fuzzy_f1(gold, pred, embedder, t=0.7499).f1 == 1.0


def _oracle_edge_score(embedder, gold_edges, pred_edges):
    """Min-endpoint score matrix computed with raw dots, no library helpers."""
    texts = sorted({n for e in gold_edges + pred_edges for n in e})
    vecs = dict(zip(texts, embedder.embed_batch(texts)))
    scores = np.empty((len(gold_edges), len(pred_edges)))
    for i, (u, v) in enumerate(gold_edges):
        for j, (a, b) in enumerate(pred_edges):
            scores[i, j] = min(float(vecs[u] @ vecs[a]), float(vecs[v] @ vecs[b]))
    return np.clip(scores, -1.0, 1.0)


class TestContinuousF1:
    def test_identical(self, wiki_graph, embedder):
        prf, matching = continuous_f1(wiki_graph, wiki_graph, embedder)
        assert prf.f1 == pytest.approx(1.0, abs=1e-9)
        assert prf.score == pytest.approx(len(wiki_graph.edges), abs=1e-9)
        assert len(matching) == len(wiki_graph.edges)

    def test_synonym_fixture_two_thirds(self, synonym_pair, embedder):
        gold, pred = synonym_pair
        prf, _ = continuous_f1(gold, pred, embedder)
        assert prf.score == pytest.approx(1.0, abs=1e-9)
        assert prf.precision == pytest.approx(0.5, abs=1e-9)
        assert prf.recall == pytest.approx(1.0, abs=1e-9)
        assert prf.f1 == pytest.approx(2 / 3, abs=1e-9)

    def test_matches_brute_force_on_random_pairs(self, embedder):
        rng = np.random.default_rng(3)
        pool = [f"c{i}" for i in range(6)]
        for _ in range(30):
            gold = random_concept_graph(rng, 6, int(rng.integers(1, 8)))
            pred = random_concept_graph(rng, 6, int(rng.integers(1, 8)))
            prf, _ = continuous_f1(gold, pred, embedder)
            expected = best_injective_matching(
                _oracle_edge_score(embedder, gold.sorted_edges, pred.sorted_edges)
            )
            assert prf.score == pytest.approx(expected, abs=1e-9)

    def test_empty_pred_flagged(self, embedder):
        gold = build_concept_graph("A", [("A", "B")])
        pred = ConceptGraph(root="A", nodes=frozenset({"A"}), edges=frozenset())
        prf, matching = continuous_f1(gold, pred, embedder)
        assert prf.degenerate and prf.f1 == 0.0 and matching == []

    def test_score_bounded_by_matchable_pred_edges(self, embedder):
        rng = np.random.default_rng(77)
        for _ in range(15):
            gold = random_concept_graph(rng, 5, 7)
            pred = random_concept_graph(rng, 5, 7)
            if not gold.edges or not pred.edges:
                continue
            prf, _ = continuous_f1(gold, pred, embedder)
            scores = _oracle_edge_score(embedder, gold.sorted_edges, pred.sorted_edges)
            matchable = int((scores > 0).any(axis=0).sum())
            assert prf.score <= matchable + 1e-9


class TestGraphF1:
    def test_identical(self, wiki_graph, embedder):
        prf, matching = graph_f1(wiki_graph, wiki_graph, embedder)
        assert prf.f1 == pytest.approx(1.0, abs=1e-9)
        assert len(matching) == len(wiki_graph.nodes)

    def test_matches_brute_force_on_small_pairs(self, embedder):
        rng = np.random.default_rng(9)
        for _ in range(20):
            gold = random_concept_graph(rng, int(rng.integers(2, 6)), 6)
            pred = random_concept_graph(rng, int(rng.integers(2, 6)), 6)
            prf, _ = graph_f1(gold, pred, embedder, k=2)
            g_lab, p_lab = gold.sorted_nodes, pred.sorted_nodes
            hg = sgc_dense(g_lab, set(gold.edges), embedder.embed_batch(g_lab), k=2)
            hp = sgc_dense(p_lab, set(pred.edges), embedder.embed_batch(p_lab), k=2)
            expected = best_injective_matching(np.clip(hg @ hp.T, -1, 1))
            assert prf.score == pytest.approx(expected, abs=1e-9)

    def test_extra_isolated_node_costs_precision_only(self, embedder):
        gold = build_concept_graph("R", [("R", "A"), ("A", "B")])
        pred = ConceptGraph(
            root="R", nodes=gold.nodes | {"unrelated"}, edges=gold.edges
        )
        prf, _ = graph_f1(gold, pred, embedder)
        n = len(gold.nodes)
        assert prf.recall == pytest.approx(1.0, abs=1e-9)
        assert prf.precision == pytest.approx(n / (n + 1), abs=1e-9)


class TestRootExclusion:
    def test_literal_ignores_root_edges_when_excluded(self):
        gold = build_concept_graph("R", [("R", "A"), ("A", "B")])
        pred = build_concept_graph("R", [("R", "A"), ("A", "C")])
        incl = literal_f1(gold, pred, include_root=True)
        excl = literal_f1(gold, pred, include_root=False)
        assert incl.precision == 0.5
        assert excl.precision == 0.0  # only (A,B) vs (A,C) remain

    def test_continuous_root_excluded(self, embedder):
        gold = build_concept_graph("R", [("R", "A")])
        pred = build_concept_graph("R", [("R", "A")])
        prf, _ = continuous_f1(gold, pred, embedder, include_root=False)
        assert prf.degenerate


def test_harmonic_f1_zero_when_both_zero():
    assert harmonic_f1(0.0, 0.0) == 0.0
    assert harmonic_f1(1.0, 1.0) == 1.0
    assert harmonic_f1(1.0, 0.5) == pytest.approx(2 / 3)
