"""Corpus ingestion, relevant-subgraph samples, path-length selection, splits.

A document annotated with concepts turns into a training sample by taking
every simple path of bounded length from the ontology root to one of its
concepts; the union of those paths is the document's relevant subgraph.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Iterable, Sequence

import numpy as np

from ._fileio import write_jsonl_atomic
from .errors import DataError
from .graph import ConceptGraph, Path, enumerate_paths, induced_subgraph

logger = logging.getLogger(__name__)

SPLIT_RATIOS = (7, 3, 10)
SPLIT_NAMES = ("train", "val", "test")


@dataclass(frozen=True)
class DocumentRecord:
    id: str
    title: str
    text: str
    concepts: tuple[str, ...]


@dataclass(frozen=True)
class SubgraphSample:
    """A document together with its relevant paths and induced subgraph."""

    document: DocumentRecord
    paths: tuple[Path, ...]
    subgraph: ConceptGraph


@dataclass(frozen=True)
class OntologySplit:
    train: ConceptGraph
    val: ConceptGraph
    test: ConceptGraph
    top_train: tuple[str, ...]
    top_val: tuple[str, ...]
    top_test: tuple[str, ...]

    @property
    def graphs(self) -> dict[str, ConceptGraph]:
        return {"train": self.train, "val": self.val, "test": self.test}

    @property
    def top_level_partition(self) -> dict[str, tuple[str, ...]]:
        return {"train": self.top_train, "val": self.top_val, "test": self.top_test}


def load_corpus(path: str | FsPath) -> list[DocumentRecord]:
    """Read a JSONL corpus of {id, title, text, concepts} records.

    Malformed lines are skipped with a line-numbered diagnostic; a duplicate
    id is fatal because downstream stages key everything by document id.
    """
    records: list[DocumentRecord] = []
    seen: set[str] = set()
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                rec = DocumentRecord(
                    id=str(doc["id"]),
                    title=str(doc["title"]),
                    text=str(doc["text"]),
                    concepts=tuple(str(c) for c in doc["concepts"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                skipped += 1
                logger.warning("%s:%d: skipping malformed record (%s)", path, lineno, exc)
                continue
            if rec.id in seen:
                raise DataError(f"{path}:{lineno}: duplicate document id {rec.id!r}")
            seen.add(rec.id)
            records.append(rec)
    if skipped:
        logger.warning("%s: skipped %d malformed line(s)", path, skipped)
    return records


def build_sample(doc: DocumentRecord, g: ConceptGraph, n_max: int) -> SubgraphSample | None:
    """Relevant subgraph for one document, or None if no concept is in the graph."""
    targets = sorted(set(doc.concepts) & g.nodes)
    dropped = set(doc.concepts) - g.nodes
    if dropped:
        logger.debug("document %s: dropping %d concept(s) not in graph", doc.id, len(dropped))
    if not targets:
        return None
    paths = tuple(enumerate_paths(g, targets, n_max))
    return SubgraphSample(document=doc, paths=paths, subgraph=induced_subgraph(paths, root=g.root))


def build_samples(
    corpus: Sequence[DocumentRecord], g: ConceptGraph, n_max: int, jobs: int = 1
) -> list[SubgraphSample]:
    """One sample per document with at least one in-graph concept.

    Documents are independent, so this parallelises trivially; outputs are
    merged in input order regardless of ``jobs``.
    """
    if n_max < 1:
        raise DataError(f"n_max must be >= 1, got {n_max}")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda d: build_sample(d, g, n_max), corpus))
    else:
        results = [build_sample(d, g, n_max) for d in corpus]
    omitted = sum(1 for r in results if r is None)
    if omitted:
        logger.info("omitted %d document(s) with no concept in the graph", omitted)
    return [r for r in results if r is not None]


def edge_coverage(g: ConceptGraph, samples: Iterable[SubgraphSample]) -> float:
    """Fraction of the graph's edges appearing in at least one sample subgraph."""
    if not g.edges:
        raise DataError("graph has no edges; coverage is undefined")
    covered: set = set()
    for s in samples:
        covered.update(s.subgraph.edges)
    return len(covered & g.edges) / len(g.edges)


def choose_path_length(
    g: ConceptGraph,
    corpus: Sequence[DocumentRecord],
    coverage: float = 0.99,
    n_cap: int = 8,
) -> tuple[int, dict[int, float]]:
    """Smallest N whose relevant subgraphs cover more than ``coverage`` of the edges.

    Paths are enumerated once per document at ``n_cap`` and each edge is
    tagged with the shortest relevant path containing it, which yields the
    whole coverage curve in one pass. Path enumeration is exponential in the
    worst case, so ``n_cap`` is a safety valve; if the target coverage is not
    reached by then, the longest useful path length is returned with a
    warning.
    """
    if not corpus:
        raise DataError("corpus is empty")
    if not g.edges:
        raise DataError("graph has no edges")
    if n_cap < 1:
        raise DataError(f"n_cap must be >= 1, got {n_cap}")
    min_len: dict = {}
    longest = 0
    for doc in corpus:
        targets = sorted(set(doc.concepts) & g.nodes)
        if not targets:
            continue
        for p in enumerate_paths(g, targets, n_cap):
            plen = len(p) - 1
            longest = max(longest, plen)
            for e in zip(p, p[1:]):
                if min_len.get(e, n_cap + 1) > plen:
                    min_len[e] = plen
    total = len(g.edges)
    curve = {
        n: sum(1 for e, l in min_len.items() if l <= n and e in g.edges) / total
        for n in range(1, n_cap + 1)
    }
    for n in range(1, n_cap + 1):
        if curve[n] > coverage:
            return n, curve
    best = max(longest, 1)
    logger.warning(
        "coverage %.3f not reached by N=%d (max %.3f); returning longest useful length %d",
        coverage,
        n_cap,
        curve[n_cap],
        best,
    )
    return best, curve


def _apportion(n: int, ratios: Sequence[int], min_each: int = 1) -> list[int]:
    """Largest-remainder apportionment of ``n`` items, each part >= min_each."""
    total = sum(ratios)
    quotas = [n * r / total for r in ratios]
    counts = [int(q) for q in quotas]
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    # steal from the largest part until every part meets the minimum
    for i in range(len(counts)):
        while counts[i] < min_each:
            donor = max(range(len(counts)), key=lambda j: (counts[j], -j))
            if counts[donor] <= min_each:
                raise DataError(f"cannot split {n} items into {len(ratios)} non-empty parts")
            counts[donor] -= 1
            counts[i] += 1
    return counts


def split_ontology(g: ConceptGraph, seed: int) -> OntologySplit:
    """Partition the root's children 7:3:10 and cut one subgraph per part.

    Each split keeps the root, its own top-level nodes, and every node within
    directed distance d-1 of one of them, where d is the root's eccentricity
    in the full graph; edges are all full-graph edges between retained nodes.
    """
    top = list(g.successors(g.root))
    if len(top) < 3:
        raise DataError(f"root has {len(top)} children; need at least 3 to split")
    rng = np.random.default_rng(seed)
    rng.shuffle(top)
    sizes = _apportion(len(top), SPLIT_RATIOS)
    bounds = [0, sizes[0], sizes[0] + sizes[1], len(top)]
    parts = [tuple(top[bounds[i] : bounds[i + 1]]) for i in range(3)]

    radius = max(g.root_eccentricity() - 1, 0)
    graphs = []
    for part in parts:
        dist = g.distances_from(part)
        keep = {v for v, dv in dist.items() if dv <= radius}
        keep.update(part)
        keep.add(g.root)
        edges = frozenset(e for e in g.edges if e[0] in keep and e[1] in keep)
        graphs.append(ConceptGraph(root=g.root, nodes=frozenset(keep), edges=edges))
    return OntologySplit(
        train=graphs[0],
        val=graphs[1],
        test=graphs[2],
        top_train=parts[0],
        top_val=parts[1],
        top_test=parts[2],
    )


def split_overlap_report(split: OntologySplit) -> dict:
    """Venn counts of the three splits' node sets, for inspection."""
    sets = {name: set(graph.nodes) for name, graph in split.graphs.items()}
    tr, va, te = sets["train"], sets["val"], sets["test"]
    return {
        "sizes": {k: len(v) for k, v in sets.items()},
        "top_level_sizes": {k: len(v) for k, v in split.top_level_partition.items()},
        "train_only": len(tr - va - te),
        "val_only": len(va - tr - te),
        "test_only": len(te - tr - va),
        "train_val": len((tr & va) - te),
        "train_test": len((tr & te) - va),
        "val_test": len((va & te) - tr),
        "all": len(tr & va & te),
    }


def save_samples(samples: Iterable[SubgraphSample], path: str | FsPath) -> None:
    write_jsonl_atomic(
        path,
        (
            {
                "id": s.document.id,
                "title": s.document.title,
                "text": s.document.text,
                "concepts": list(s.document.concepts),
                "root": s.subgraph.root,
                "paths": [list(p) for p in s.paths],
            }
            for s in samples
        ),
    )


def load_samples(path: str | FsPath) -> list[SubgraphSample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                rec = DocumentRecord(
                    id=str(doc["id"]),
                    title=str(doc["title"]),
                    text=str(doc["text"]),
                    concepts=tuple(str(c) for c in doc.get("concepts", ())),
                )
                root = str(doc["root"])
                paths = tuple(tuple(str(x) for x in p) for p in doc["paths"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: malformed sample record ({exc})") from exc
            samples.append(
                SubgraphSample(document=rec, paths=paths, subgraph=induced_subgraph(paths, root=root))
            )
    return samples
