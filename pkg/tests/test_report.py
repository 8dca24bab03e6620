from __future__ import annotations

import json
import math

import numpy as np
import pytest

from conftest import random_concept_graph
from ontokit.embeddings import DeterministicEmbedder
from ontokit.errors import DataError
from ontokit.graph import build_concept_graph
from ontokit.metrics import (
    MetricReport,
    continuous_f1,
    evaluate,
    export_matching_dot,
    fuzzy_f1,
    graph_f1,
    literal_f1,
    motif_distance,
)


@pytest.fixture
def embedder():
    return DeterministicEmbedder(dim=128, seed=1)


class TestEvaluate:
    def test_identity(self, wiki_graph, embedder):
        report = evaluate(wiki_graph, wiki_graph, embedder)
        for value in report.headline().values():
            assert value == pytest.approx(1.0, abs=1e-9) or value == pytest.approx(0.0, abs=1e-9)
        assert report.motif_distance == 0.0
        assert report.literal.f1 == 1.0
        assert not report.flags

    def test_composition_equals_individual_metrics(self, embedder):
        rng = np.random.default_rng(51)
        gold = random_concept_graph(rng, 6, 9)
        pred = random_concept_graph(rng, 6, 9)
        report = evaluate(gold, pred, embedder)
        assert report.literal == literal_f1(gold, pred)
        assert report.fuzzy == fuzzy_f1(gold, pred, embedder)
        cont, edge_m = continuous_f1(gold, pred, embedder)
        gra, node_m = graph_f1(gold, pred, embedder)
        assert report.continuous == cont
        assert report.graph == gra
        assert report.edge_matching == tuple(edge_m)
        assert report.node_matching == tuple(node_m)
        assert report.motif_distance == motif_distance(gold, pred)

    def test_tiny_graph_flags_motif_instead_of_failing(self, embedder):
        g = build_concept_graph("A", [("A", "B")])
        report = evaluate(g, g, embedder)
        assert math.isnan(report.motif_distance)
        assert any("motif" in f for f in report.flags)

    def test_score_bounds_invariant(self, embedder):
        rng = np.random.default_rng(53)
        for _ in range(10):
            gold = random_concept_graph(rng, 5, 7)
            pred = random_concept_graph(rng, 5, 7)
            report = evaluate(gold, pred, embedder)
            assert report.continuous.score <= min(len(gold.edges), len(pred.edges)) + 1e-9
            assert report.graph.score <= min(len(gold.nodes), len(pred.nodes)) + 1e-9
            for prf in (report.literal, report.fuzzy, report.continuous, report.graph):
                for v in (prf.precision, prf.recall, prf.f1):
                    assert -1e-9 <= v <= 1 + 1e-9


class TestMetricReportSchema:
    def test_round_trip(self, wiki_graph, embedder):
        report = evaluate(wiki_graph, wiki_graph, embedder)
        doc = json.loads(json.dumps(report.to_json_dict()))
        again = MetricReport.from_json_dict(doc)
        assert again.headline() == report.headline()
        assert again.edge_matching == report.edge_matching

    def test_reference_headline_row_parses(self):
        """The published Wikipedia headline numbers form a valid report."""
        section = lambda f1: {"precision": f1, "recall": f1, "f1": f1}
        doc = {
            "literal": section(0.093),
            "fuzzy": section(0.915),
            "continuous": {**section(0.500), "score": 100.0},
            "graph": {**section(0.644), "score": 200.0},
            "motif_distance": 0.080,
        }
        report = MetricReport.from_json_dict(doc)
        assert report.headline() == {
            "literal_f1": 0.093,
            "fuzzy_f1": 0.915,
            "continuous_f1": 0.500,
            "graph_f1": 0.644,
            "motif_distance": 0.080,
        }

    def test_out_of_range_rejected(self):
        good = {"precision": 0.5, "recall": 0.5, "f1": 0.5}
        doc = {
            "literal": good,
            "fuzzy": good,
            "continuous": good,
            "graph": good,
            "motif_distance": 1.5,
        }
        with pytest.raises(DataError):
            MetricReport.from_json_dict(doc)

    def test_save_load(self, tmp_path, wiki_graph, embedder):
        report = evaluate(wiki_graph, wiki_graph, embedder)
        path = tmp_path / "report.json"
        report.save(path)
        assert MetricReport.load(path).headline() == report.headline()


class TestDotExport:
    def test_dot_contains_both_graphs_and_matches(self, embedder):
        gold = build_concept_graph("R", [("R", "A"), ("A", "B")])
        pred = build_concept_graph("R", [("R", "A"), ("A", "C")])
        report = evaluate(gold, pred, embedder)
        dot = export_matching_dot(gold, pred, report)
        assert dot.startswith("digraph")
        assert "cluster_gold" in dot and "cluster_pred" in dot
        assert '"A"' in dot and '"C"' in dot
        assert "style=dashed" in dot
        # opacity encoded as trailing alpha hex on the match colour
        assert "#FF0000" in dot

    def test_quotes_escaped(self, embedder):
        gold = build_concept_graph('say "hi"', [('say "hi"', "A")])
        report = evaluate(gold, gold, embedder)
        dot = export_matching_dot(gold, gold, report)
        assert '\\"hi\\"' in dot
