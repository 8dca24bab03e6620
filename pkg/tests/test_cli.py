from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest
from click.testing import CliRunner

from ontokit.cli import main
from ontokit.graph import load_graph

ROOT = "Everything"

GOLD_EDGES = [
    [ROOT, "Science"],
    [ROOT, "Culture"],
    [ROOT, "Politics"],
    [ROOT, "Sports"],
    ["Science", "Physics"],
    ["Science", "Biology"],
    ["Physics", "Quantum mechanics"],
    ["Culture", "Arts"],
    ["Politics", "Elections"],
    ["Sports", "Football"],
]

CORPUS = [
    {"id": "d1", "title": "Waves", "text": "On waves.", "concepts": ["Quantum mechanics"]},
    {"id": "d2", "title": "Cells", "text": "On cells.", "concepts": ["Biology"]},
    {"id": "d3", "title": "Paint", "text": "On paint.", "concepts": ["Arts", "Culture"]},
    {"id": "d4", "title": "Votes", "text": "On votes.", "concepts": ["Elections"]},
    {"id": "d5", "title": "Goals", "text": "On goals.", "concepts": ["Football"]},
    {"id": "d6", "title": "Off topic", "text": "junk", "concepts": ["Not a concept"]},
]

GENERATIONS = [
    {"doc_id": "d1", "completion": f"{ROOT} -> Science -> Physics -> Quantum mechanics"},
    {"doc_id": "d2", "completion": f"{ROOT} -> Science -> Biology\nnot a path line"},
    {"doc_id": "d3", "completion": f"{ROOT} -> Culture -> Arts\n{ROOT} -> Culture"},
    {"doc_id": "d4", "completion": f"{ROOT} -> Politics -> Elections"},
    {"doc_id": "d5", "completion": f"{ROOT} -> Sports -> Football\ngarbage -> line"},
]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def workdir(tmp_path: Path) -> Path:
    (tmp_path / "gold.json").write_text(json.dumps({"root": ROOT, "edges": GOLD_EDGES}))
    (tmp_path / "corpus.jsonl").write_text(
        "\n".join(json.dumps(d) for d in CORPUS) + "\n", encoding="utf-8"
    )
    (tmp_path / "gens.jsonl").write_text(
        "\n".join(json.dumps(g) for g in GENERATIONS) + "\n", encoding="utf-8"
    )
    return tmp_path


def ok(result):
    assert result.exit_code == 0, result.output + str(result.exception)
    return result


class TestSplitCommand:
    def test_writes_three_graphs_and_report(self, runner, workdir):
        out = workdir / "splits"
        ok(runner.invoke(main, ["split", "--graph", str(workdir / "gold.json"),
                                "--seed", "1", "--out", str(out)]))
        for name in ("train", "val", "test"):
            g = load_graph(out / f"{name}.json")
            assert g.root == ROOT
        report = json.loads((out / "split_report.json").read_text())
        sizes = [len(v) for v in report["top_level_partition"].values()]
        assert sum(sizes) == 4

    def test_byte_identical_rerun(self, runner, workdir):
        out = workdir / "splits"
        args = ["split", "--graph", str(workdir / "gold.json"), "--seed", "7", "--out", str(out)]
        ok(runner.invoke(main, args))
        first = (out / "train.json").read_bytes()
        ok(runner.invoke(main, args))
        assert (out / "train.json").read_bytes() == first


class TestBuildDatasetCommand:
    def test_auto_n_selection(self, runner, workdir):
        samples = workdir / "samples.jsonl"
        report = workdir / "dataset_report.json"
        result = ok(
            runner.invoke(
                main,
                ["build-dataset", "--graph", str(workdir / "gold.json"),
                 "--corpus", str(workdir / "corpus.jsonl"), "--n", "auto",
                 "--out", str(samples), "--report", str(report)],
            )
        )
        assert "wrote 5 samples" in result.output
        doc = json.loads(report.read_text())
        assert doc["n"] == 3  # deepest annotated concept is 3 hops down
        assert doc["coverage_curve"]["3"] > 0.99

    def test_explicit_n(self, runner, workdir):
        samples = workdir / "s.jsonl"
        ok(runner.invoke(main, ["build-dataset", "--graph", str(workdir / "gold.json"),
                                "--corpus", str(workdir / "corpus.jsonl"), "--n", "2",
                                "--out", str(samples)]))
        rows = [json.loads(l) for l in samples.read_text().splitlines()]
        assert all(len(p) - 1 <= 2 for r in rows for p in r["paths"])

    def test_bad_n_is_usage_error(self, runner, workdir):
        result = runner.invoke(main, ["build-dataset", "--graph", str(workdir / "gold.json"),
                                      "--corpus", str(workdir / "corpus.jsonl"),
                                      "--n", "many", "--out", "x.jsonl"])
        assert result.exit_code == 2


class TestLinearizeCommand:
    def test_masked_export_schema(self, runner, workdir):
        samples = workdir / "samples.jsonl"
        train = workdir / "train.jsonl"
        ok(runner.invoke(main, ["build-dataset", "--graph", str(workdir / "gold.json"),
                                "--corpus", str(workdir / "corpus.jsonl"), "--n", "4",
                                "--out", str(samples)]))
        ok(runner.invoke(main, ["linearize", "--samples", str(samples),
                                "--seed", "3", "--out", str(train)]))
        rows = [json.loads(l) for l in train.read_text().splitlines()]
        assert len(rows) == 5
        for row in rows:
            assert set(row) == {"id", "prompt", "target", "mask_spans"}
            assert row["prompt"].startswith("<s>[INST]")

    def test_deterministic_given_seed(self, runner, workdir):
        samples = workdir / "samples.jsonl"
        ok(runner.invoke(main, ["build-dataset", "--graph", str(workdir / "gold.json"),
                                "--corpus", str(workdir / "corpus.jsonl"), "--n", "4",
                                "--out", str(samples)]))
        a, b = workdir / "a.jsonl", workdir / "b.jsonl"
        ok(runner.invoke(main, ["linearize", "--samples", str(samples), "--seed", "9",
                                "--out", str(a)]))
        ok(runner.invoke(main, ["linearize", "--samples", str(samples), "--seed", "9",
                                "--out", str(b)]))
        assert a.read_bytes() == b.read_bytes()


class TestAggregateCommand:
    def test_prune_and_report(self, runner, workdir):
        pred = workdir / "pred.json"
        report = workdir / "prune_report.json"
        result = ok(
            runner.invoke(
                main,
                ["aggregate", "--gens", str(workdir / "gens.jsonl"), "--root", ROOT,
                 "--n-max", "4", "--alpha", "0", "--beta", "0",
                 "--out", str(pred), "--report", str(report)],
            )
        )
        g = load_graph(pred)
        assert g.root == ROOT
        assert set(map(tuple, GOLD_EDGES)) == set(g.edges)
        doc = json.loads(report.read_text())
        assert doc["parse"]["rejected_lines"] == 2
        assert "rejected" in result.output

    def test_acyclic_flag(self, runner, workdir):
        gens = workdir / "cyc.jsonl"
        gens.write_text(
            json.dumps({"doc_id": "x", "completion": "R -> A -> B\nR -> B"})
            + "\n"
            + json.dumps({"doc_id": "y", "completion": "R -> B -> A"})
            + "\n"
        )
        pred = workdir / "cyc_pred.json"
        ok(runner.invoke(main, ["aggregate", "--gens", str(gens), "--root", "R",
                                "--n-max", "4", "--acyclic", "--out", str(pred)]))
        import networkx as nx

        assert nx.is_directed_acyclic_graph(nx.DiGraph(load_graph(pred).edges))

    def test_unparseable_gens_is_data_error(self, runner, workdir):
        gens = workdir / "junk.jsonl"
        gens.write_text(json.dumps({"doc_id": "x", "completion": "nothing useful"}) + "\n")
        result = runner.invoke(main, ["aggregate", "--gens", str(gens), "--root", ROOT,
                                      "--out", str(workdir / "p.json")])
        assert result.exit_code == 3
        assert "error: data:" in result.output + (result.stderr or "")

    def test_idempotent_output(self, runner, workdir):
        pred = workdir / "pred.json"
        args = ["aggregate", "--gens", str(workdir / "gens.jsonl"), "--root", ROOT,
                "--out", str(pred)]
        ok(runner.invoke(main, args))
        first = pred.read_bytes()
        ok(runner.invoke(main, args))
        assert pred.read_bytes() == first


class TestEvaluateCommand:
    def test_pred_equals_gold_is_all_ones(self, runner, workdir):
        report = workdir / "report.json"
        result = ok(
            runner.invoke(
                main,
                ["evaluate", "--gold", str(workdir / "gold.json"),
                 "--pred", str(workdir / "gold.json"),
                 "--embedder", "test:dim=64", "--out", str(report)],
            )
        )
        doc = json.loads(report.read_text())
        for key in ("literal", "fuzzy", "continuous", "graph"):
            assert doc[key]["f1"] == pytest.approx(1.0, abs=1e-9)
        assert doc["motif_distance"] == 0.0
        assert "literal_f1: 1.0000" in result.output

    def test_dot_export(self, runner, workdir):
        dot = workdir / "match.dot"
        ok(runner.invoke(main, ["evaluate", "--gold", str(workdir / "gold.json"),
                                "--pred", str(workdir / "gold.json"),
                                "--out", str(workdir / "r.json"), "--dot", str(dot)]))
        text = dot.read_text()
        assert text.startswith("digraph") and "style=dashed" in text

    def test_default_threshold_is_published_value(self, runner):
        result = ok(runner.invoke(main, ["evaluate", "--help"]))
        assert "0.436" in result.output

    def test_embed_cache_round_trip(self, runner, workdir):
        cache = workdir / "cache.jsonl"
        args = ["evaluate", "--gold", str(workdir / "gold.json"),
                "--pred", str(workdir / "gold.json"),
                "--embed-cache", str(cache), "--out", str(workdir / "r.json")]
        ok(runner.invoke(main, args))
        assert cache.exists() and cache.stat().st_size > 0
        ok(runner.invoke(main, args))  # second run reads the cache


class TestTuneCommand:
    def test_tuning_report(self, runner, workdir):
        out = workdir / "tuning.json"
        ok(runner.invoke(main, ["tune", "--gens", str(workdir / "gens.jsonl"),
                                "--root", ROOT, "--n-max", "4",
                                "--gold-val", str(workdir / "gold.json"),
                                "--embedder", "test:dim=32", "--out", str(out)]))
        doc = json.loads(out.read_text())
        assert len(doc["cells"]) == 441
        assert doc["best"] == {"alpha": 0.0, "beta": 0.0}
        assert max(c["continuous_f1"] for c in doc["cells"]) == pytest.approx(1.0, abs=1e-9)


class _CompletionStub(BaseHTTPRequestHandler):
    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        title = next(
            (l.removeprefix("Title: ") for l in body["prompt"].splitlines()
             if l.startswith("Title: ")),
            "",
        )
        completion = {
            "Waves": f"{ROOT} -> Science -> Physics",
            "Cells": f"{ROOT} -> Science -> Biology",
        }.get(title, f"{ROOT} -> Culture")
        payload = json.dumps({"choices": [{"text": completion}]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def completion_endpoint():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _CompletionStub)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    yield f"http://127.0.0.1:{server.server_port}/v1/completions"
    server.shutdown()


class TestGenerateCommand:
    def test_collects_completions(self, runner, workdir, completion_endpoint):
        out = workdir / "gens_out.jsonl"
        result = ok(
            runner.invoke(
                main,
                ["generate", "--corpus", str(workdir / "corpus.jsonl"),
                 "--endpoint", completion_endpoint, "--root", ROOT,
                 "--shots", "0", "--out", str(out)],
            )
        )
        rows = [json.loads(l) for l in out.read_text().splitlines()]
        assert len(rows) == len(CORPUS)
        assert rows[0]["completion"] == f"{ROOT} -> Science -> Physics"
        assert "wrote 6/6 completions" in result.output

    def test_unreachable_endpoint_is_network_error(self, runner, workdir):
        result = runner.invoke(
            main,
            ["generate", "--corpus", str(workdir / "corpus.jsonl"),
             "--endpoint", "http://127.0.0.1:9/nope", "--root", ROOT,
             "--retries", "1", "--backoff", "0", "--out", str(workdir / "x.jsonl")],
        )
        assert result.exit_code == 4

    def test_shots_require_samples(self, runner, workdir, completion_endpoint):
        result = runner.invoke(
            main,
            ["generate", "--corpus", str(workdir / "corpus.jsonl"),
             "--endpoint", completion_endpoint, "--root", ROOT,
             "--shots", "3", "--out", str(workdir / "x.jsonl")],
        )
        assert result.exit_code == 2


class TestConfigPrecedence:
    def test_config_file_supplies_defaults(self, runner, workdir):
        cfg = workdir / "conf.json"
        cfg.write_text(json.dumps({"split": {"seed": 5}}))
        out = workdir / "via_config"
        ok(runner.invoke(main, ["--config", str(cfg), "split",
                                "--graph", str(workdir / "gold.json"), "--out", str(out)]))
        assert json.loads((out / "split_report.json").read_text())["seed"] == 5

    def test_flag_beats_env_beats_config(self, runner, workdir):
        cfg = workdir / "conf.json"
        cfg.write_text(json.dumps({"split": {"seed": 5}}))
        base = ["--config", str(cfg), "split", "--graph", str(workdir / "gold.json")]
        out_env = workdir / "via_env"
        ok(runner.invoke(main, base + ["--out", str(out_env)],
                         env={"ONTOKIT_SPLIT_SEED": "6"}))
        assert json.loads((out_env / "split_report.json").read_text())["seed"] == 6
        out_flag = workdir / "via_flag"
        ok(runner.invoke(main, base + ["--seed", "7", "--out", str(out_flag)],
                         env={"ONTOKIT_SPLIT_SEED": "6"}))
        assert json.loads((out_flag / "split_report.json").read_text())["seed"] == 7

    def test_missing_input_is_usage_error(self, runner):
        result = runner.invoke(main, ["split", "--graph", "no-such-file.json", "--out", "x"])
        assert result.exit_code == 2
