"""Reference baselines: train-graph memorisation and prompt-an-LLM glue.

Both feed the same aggregation and metric path as the main pipeline, so a
baseline run differs from a model run only in where the subgraphs come from.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

from .aggregate import sum_subgraphs
from .dataset import DocumentRecord, SubgraphSample
from .errors import DataError
from .graph import WeightedGraph
from .sequence import ParsedGeneration, _doc_rng, parse_generation, render_prompt

logger = logging.getLogger(__name__)

CompletionFn = Callable[[str], str]


def memorisation_graph(train_samples: Sequence[SubgraphSample]) -> WeightedGraph:
    """Predict the training relations, weighted by relevant-subgraph occurrence."""
    if not train_samples:
        raise DataError("no training samples")
    return sum_subgraphs([s.subgraph for s in train_samples])


def _pick_shots(
    rng, train_samples: Sequence[SubgraphSample], count: int
) -> list[SubgraphSample]:
    usable = [s for s in train_samples if s.paths]
    if count > len(usable):
        raise DataError(f"need {count} example samples but only {len(usable)} are usable")
    idx = rng.choice(len(usable), size=count, replace=False)
    return [usable[int(i)] for i in idx]


def run_prompting_baseline(
    corpus: Sequence[DocumentRecord],
    shots_per_query: int,
    train_samples: Sequence[SubgraphSample],
    completion_client: CompletionFn,
    root: str,
    n_max: int,
    seed: int = 0,
    jobs: int = 1,
) -> tuple[list[ParsedGeneration], list[str]]:
    """Prompt the completion endpoint once per document and parse the answers.

    Shots are drawn per query, without replacement, from a stream seeded by
    (seed, document id), so runs are reproducible regardless of worker count.
    A failed document is recorded and skipped, never fatal. Returns the
    parsed generations and the ids of failed documents.
    """
    if shots_per_query not in (0, 1, 3):
        raise DataError(f"shots_per_query must be 0, 1 or 3, got {shots_per_query}")

    def query(doc: DocumentRecord) -> ParsedGeneration | None:
        shots = (
            _pick_shots(_doc_rng(seed, doc.id), train_samples, shots_per_query)
            if shots_per_query
            else []
        )
        prompt = render_prompt(doc, shots, root=root)
        try:
            completion = completion_client(prompt)
        except Exception as exc:
            logger.warning("completion failed for document %s: %s", doc.id, exc)
            return None
        return parse_generation(doc.id, completion, root=root, n_max=n_max)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(query, corpus))
    else:
        results = [query(d) for d in corpus]
    failed = [doc.id for doc, res in zip(corpus, results) if res is None]
    return [r for r in results if r is not None], failed
