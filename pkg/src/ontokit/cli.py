"""Command-line surface for the whole pipeline.

Configuration precedence per option: explicit flag, then environment
variable (``ONTOKIT_<COMMAND>_<OPTION>``), then the ``--config`` JSON file
(a mapping of command name to option defaults), then the built-in default.

Exit codes: 0 success, 2 usage error, 3 data error, 4 network error. All
outputs are written atomically (temp file + rename).
"""

from __future__ import annotations

import functools
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path as FsPath

import click

from . import aggregate as agg
from . import clients, dataset, sequence, tuner
from ._fileio import write_json_atomic, write_jsonl_atomic
from .embeddings import DEFAULT_SIMILARITY_THRESHOLD, open_embedder
from .errors import DataError, NetworkError, OntokitError
from .graph import induced_subgraph, load_graph
from .metrics import evaluate, save_matching_dot

logger = logging.getLogger(__name__)

EXIT_DATA_ERROR = 3
EXIT_NETWORK_ERROR = 4


def _wrap_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NetworkError as exc:
            click.echo(f"error: network: {exc}", err=True)
            sys.exit(EXIT_NETWORK_ERROR)
        except (DataError, OntokitError, OSError) as exc:
            click.echo(f"error: data: {exc}", err=True)
            sys.exit(EXIT_DATA_ERROR)

    return wrapper


@click.group(context_settings={"auto_envvar_prefix": "ONTOKIT"})
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file mapping command names to option defaults.",
)
@click.option("-v", "--verbose", count=True, help="-v for info, -vv for debug logging.")
@click.pass_context
def main(ctx: click.Context, config: str | None, verbose: int) -> None:
    """Build, prune, and score concept taxonomies generated from documents."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if config:
        with open(config, encoding="utf-8") as fh:
            try:
                ctx.default_map = json.load(fh)
            except json.JSONDecodeError as exc:
                raise click.UsageError(f"bad config file {config}: {exc}")


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--root", default=None, help="Root label (required for TSV inputs without one).")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@_wrap_errors
def split(graph_path: str, root: str | None, seed: int, out_dir: str) -> None:
    """Partition an ontology into train/val/test subgraphs (7:3:10 top level)."""
    g = load_graph(graph_path, root=root)
    result = dataset.split_ontology(g, seed)
    out = FsPath(out_dir)
    for name, part in result.graphs.items():
        part.save(out / f"{name}.json")
    write_json_atomic(
        out / "split_report.json",
        {
            "seed": seed,
            "top_level_partition": {k: list(v) for k, v in result.top_level_partition.items()},
            "overlap": dataset.split_overlap_report(result),
        },
    )
    click.echo(f"wrote {', '.join(n + '.json' for n in result.graphs)} to {out_dir}")


@main.command("build-dataset")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--root", default=None)
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--n", "n_spec", default="auto", show_default=True,
              help="Path length bound, or 'auto' for the smallest N covering >99% of edges.")
@click.option("--coverage", default=0.99, show_default=True, type=float)
@click.option("--n-cap", default=8, show_default=True, type=int,
              help="Largest N tried by auto selection.")
@click.option("--jobs", default=1, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--report", "report_path", default=None, type=click.Path(),
              help="Optional JSON sidecar with the chosen N and coverage curve.")
@_wrap_errors
def build_dataset(
    graph_path: str,
    root: str | None,
    corpus_path: str,
    n_spec: str,
    coverage: float,
    n_cap: int,
    jobs: int,
    out_path: str,
    report_path: str | None,
) -> None:
    """Pair each document with its relevant subgraph."""
    g = load_graph(graph_path, root=root)
    corpus = dataset.load_corpus(corpus_path)
    curve: dict[int, float] = {}
    if n_spec.strip().lower() == "auto":
        n, curve = dataset.choose_path_length(g, corpus, coverage=coverage, n_cap=n_cap)
        click.echo(f"auto-selected N={n}", err=True)
    else:
        try:
            n = int(n_spec)
        except ValueError:
            raise click.UsageError(f"--n must be an integer or 'auto', got {n_spec!r}")
    samples = dataset.build_samples(corpus, g, n, jobs=jobs)
    dataset.save_samples(samples, out_path)
    if report_path:
        write_json_atomic(
            report_path,
            {"n": n, "coverage_curve": {str(k): v for k, v in sorted(curve.items())},
             "documents": len(corpus), "samples": len(samples)},
        )
    click.echo(f"wrote {len(samples)} samples to {out_path}")


@main.command()
@click.option("--samples", "samples_path", required=True, type=click.Path(exists=True))
@click.option("--mask/--no-mask", default=True, show_default=True,
              help="Flag frequent-relation child nodes out of the training loss.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@_wrap_errors
def linearize(samples_path: str, mask: bool, seed: int, out_path: str) -> None:
    """Render samples into prompt/target training sequences (JSONL)."""
    samples = [s for s in dataset.load_samples(samples_path) if s.paths]
    if not samples:
        raise DataError(f"{samples_path}: no samples with paths")
    if mask:
        table = sequence.build_frequency_table(samples)
        seqs = [sequence.annotate_masks(s, table, seed) for s in samples]
    else:
        seqs = [sequence.plain_sequence(s) for s in samples]
    sequence.export_training_jsonl(seqs, out_path)
    masked = sum(1 for q in seqs for f in q.mask_flags.values() if f)
    click.echo(f"wrote {len(seqs)} sequences ({masked} masked nodes) to {out_path}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--endpoint", required=True, help="Completion endpoint URL.")
@click.option("--root", required=True, help="Root label the prompts anchor to.")
@click.option("--shots", default=0, show_default=True, type=click.Choice(["0", "1", "3"]))
@click.option("--samples", "samples_path", default=None, type=click.Path(exists=True),
              help="Training samples to draw example shots from (required for shots > 0).")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--temperature", default=clients.DEFAULT_TEMPERATURE, show_default=True, type=float)
@click.option("--top-p", default=clients.DEFAULT_TOP_P, show_default=True, type=float)
@click.option("--max-tokens", default=512, show_default=True, type=int)
@click.option("--response-pointer", default="/choices/0/text", show_default=True,
              help="JSON pointer to the completion text in the endpoint response.")
@click.option("--retries", default=3, show_default=True, type=int)
@click.option("--backoff", default=1.0, show_default=True, type=float)
@click.option("--jobs", default=1, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@_wrap_errors
def generate(
    corpus_path: str,
    endpoint: str,
    root: str,
    shots: str,
    samples_path: str | None,
    seed: int,
    temperature: float,
    top_p: float,
    max_tokens: int,
    response_pointer: str,
    retries: int,
    backoff: float,
    jobs: int,
    out_path: str,
) -> None:
    """Prompt a completion endpoint for each document and store raw completions."""
    n_shots = int(shots)
    corpus = dataset.load_corpus(corpus_path)
    train_samples = dataset.load_samples(samples_path) if samples_path else []
    if n_shots and not train_samples:
        raise click.UsageError("--shots > 0 requires --samples")
    client = clients.CompletionClient(
        url=endpoint,
        temperature=temperature,
        top_p=top_p,
        max_tokens=max_tokens,
        response_pointer=response_pointer,
        retries=retries,
        backoff=backoff,
    )

    def query(doc: dataset.DocumentRecord) -> tuple[str, str] | None:
        shot_samples = []
        if n_shots:
            rng = sequence._doc_rng(seed, doc.id)
            from .baselines import _pick_shots

            shot_samples = _pick_shots(rng, train_samples, n_shots)
        prompt = sequence.render_prompt(doc, shot_samples, root=root)
        try:
            return doc.id, client.complete(prompt)
        except NetworkError as exc:
            logger.warning("skipping document %s: %s", doc.id, exc)
            return None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(query, corpus))
    else:
        results = [query(d) for d in corpus]
    done = [r for r in results if r is not None]
    if corpus and not done:
        raise NetworkError(f"all {len(corpus)} completion requests failed")
    sequence.save_generations(done, out_path)
    click.echo(f"wrote {len(done)}/{len(corpus)} completions to {out_path}")


@main.command()
@click.option("--gens", "gens_path", required=True, type=click.Path(exists=True))
@click.option("--root", required=True)
@click.option("--n-max", default=4, show_default=True, type=int)
@click.option("--alpha", default=0.0, show_default=True, type=float)
@click.option("--beta", default=0.0, show_default=True, type=float)
@click.option("--acyclic", is_flag=True, help="Greedily break simple cycles after pruning.")
@click.option("--cycle-cap", default=100_000, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--report", "report_path", default=None, type=click.Path())
@_wrap_errors
def aggregate(
    gens_path: str,
    root: str,
    n_max: int,
    alpha: float,
    beta: float,
    acyclic: bool,
    cycle_cap: int,
    out_path: str,
    report_path: str | None,
) -> None:
    """Parse generations, sum the subgraphs, prune, and write the ontology."""
    gens = sequence.load_generations(gens_path)
    if not gens:
        raise DataError(f"{gens_path}: no generations")
    subgraphs = []
    rejected = 0
    empty = 0
    for doc_id, completion in gens:
        parsed = sequence.parse_generation(doc_id, completion, root=root, n_max=n_max)
        rejected += parsed.rejected_lines
        if parsed.paths:
            subgraphs.append(induced_subgraph(parsed.paths))
        else:
            empty += 1
    if not subgraphs:
        raise DataError("no generation produced a parseable path")
    raw = agg.sum_subgraphs(subgraphs)
    pruned, prune_report = agg.prune_weighted(raw, agg.PruneConfig(alpha=alpha, beta=beta))
    pred = agg.finalize_concept_graph(pruned, root)
    removed_cycle_edges: list = []
    if acyclic:
        pred, removed_cycle_edges = agg.remove_cycles_greedy(
            pred, cycle_cap=cycle_cap, weights=pruned.weights
        )
    pred.save(out_path)
    if report_path:
        doc = prune_report.to_json_dict()
        doc["parse"] = {
            "documents": len(gens),
            "documents_without_paths": empty,
            "rejected_lines": rejected,
        }
        doc["cycle_removal"] = {
            "enabled": acyclic,
            "count": len(removed_cycle_edges),
            "edges": [list(e) for e in removed_cycle_edges],
        }
        write_json_atomic(report_path, doc)
    click.echo(
        f"wrote {out_path}: {len(pred.nodes)} nodes, {len(pred.edges)} edges "
        f"({rejected} rejected lines, {empty} empty docs)"
    )


@main.command()
@click.option("--gens", "gens_path", required=True, type=click.Path(exists=True))
@click.option("--root", required=True)
@click.option("--n-max", default=4, show_default=True, type=int)
@click.option("--gold-val", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--embedder", "embedder_spec", default="test", show_default=True,
              help="'test[:dim=..,seed=..]', an http(s) service URL, or 'cache'.")
@click.option("--embed-cache", default=None, type=click.Path(),
              help="JSONL vector cache to read/extend.")
@click.option("--out", "out_path", required=True, type=click.Path())
@_wrap_errors
def tune(
    gens_path: str,
    root: str,
    n_max: int,
    gold_path: str,
    embedder_spec: str,
    embed_cache: str | None,
    out_path: str,
) -> None:
    """Grid-search pruning hyperparameters against a validation gold graph."""
    gens = sequence.load_generations(gens_path)
    subgraphs = []
    for doc_id, completion in gens:
        parsed = sequence.parse_generation(doc_id, completion, root=root, n_max=n_max)
        if parsed.paths:
            subgraphs.append(induced_subgraph(parsed.paths))
    if not subgraphs:
        raise DataError("no generation produced a parseable path")
    gold = load_graph(gold_path, root=None)
    embedder = open_embedder(embedder_spec, cache=embed_cache)
    raw_edges = len(agg.sum_subgraphs(subgraphs).weights)
    grid = tuner.GridSpec.default(raw_edges)
    best, cells = tuner.grid_search(subgraphs, gold, embedder, grid=grid, root=root)
    write_json_atomic(out_path, tuner.tuning_report(best, cells, grid))
    click.echo(f"best alpha={best.alpha:.6f} beta={best.beta:.6f} -> {out_path}")


@main.command("evaluate")
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--pred", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--root", default=None, help="Root label for TSV gold inputs.")
@click.option("--embedder", "embedder_spec", default="test", show_default=True)
@click.option("--embed-cache", default=None, type=click.Path())
@click.option("--t", default=DEFAULT_SIMILARITY_THRESHOLD, show_default=True, type=float,
              help="Fuzzy node-match similarity threshold.")
@click.option("--sgc-hops", default=2, show_default=True, type=int)
@click.option("--include-root/--exclude-root", default=True, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--dot", "dot_path", default=None, type=click.Path(),
              help="Also write a Graphviz view of the matchings.")
@_wrap_errors
def evaluate_cmd(
    gold_path: str,
    pred_path: str,
    root: str | None,
    embedder_spec: str,
    embed_cache: str | None,
    t: float,
    sgc_hops: int,
    include_root: bool,
    out_path: str,
    dot_path: str | None,
) -> None:
    """Score a predicted ontology against the gold standard."""
    gold = load_graph(gold_path, root=root)
    pred = load_graph(pred_path, root=root)
    embedder = open_embedder(embedder_spec, cache=embed_cache)
    report = evaluate(
        gold, pred, embedder, t=t, sgc_hops=sgc_hops, include_root=include_root
    )
    report.save(out_path)
    if dot_path:
        save_matching_dot(gold, pred, report, dot_path)
    for name, value in report.headline().items():
        click.echo(f"{name}: {value:.4f}")
    for flag in report.flags:
        click.echo(f"note: {flag}", err=True)


@main.command("harvest-wikipedia")
@click.option("--root", default="Main topic classifications", show_default=True)
@click.option("--depth", default=3, show_default=True, type=int)
@click.option("--pages-per-category", default=5000, show_default=True, type=int)
@click.option("--api-url", default=clients._WIKI_API, show_default=True)
@click.option("--sleep", default=0.05, show_default=True, type=float)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--graph-out", default=None, type=click.Path(),
              help="Also write the traversed category graph.")
@_wrap_errors
def harvest_wikipedia(
    root: str,
    depth: int,
    pages_per_category: int,
    api_url: str,
    sleep: float,
    out_path: str,
    graph_out: str | None,
) -> None:
    """Best-effort crawl of category structure and page summaries (network!)."""
    docs, graph = clients.harvest_wikipedia(
        root=root,
        depth=depth,
        pages_per_category=pages_per_category,
        api_url=api_url,
        sleep=sleep,
    )
    write_jsonl_atomic(
        out_path,
        (
            {"id": d.id, "title": d.title, "text": d.text, "concepts": list(d.concepts)}
            for d in docs
        ),
    )
    if graph_out:
        graph.save(graph_out)
    click.echo(f"wrote {len(docs)} documents to {out_path}")


if __name__ == "__main__":
    main()
