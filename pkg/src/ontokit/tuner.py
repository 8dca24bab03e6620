"""Grid search over the pruning hyperparameters (alpha, beta).

The grid is geometric on both axes: alpha sweeps 1 - geomspace(1/|E_raw|, 1)
so that thresholds thin out near "keep everything", and beta sweeps
geomspace(0.1, 1) - 0.1 over [0, 0.9]. The winning cell maximizes
Continuous F1 against the validation gold graph; ties go to the
least-pruning configuration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .aggregate import PruneConfig, finalize_concept_graph, prune_weighted, sum_subgraphs
from .embeddings import Embedder
from .errors import DataError
from .graph import ConceptGraph
from .metrics import continuous_f1

logger = logging.getLogger(__name__)

GRID_POINTS = 21


def geomspace(a: float, b: float, k: int) -> np.ndarray:
    """Geometric progression with exact endpoints a and b."""
    if a <= 0 or b <= 0:
        raise DataError(f"geomspace endpoints must be positive, got {a}, {b}")
    if k < 2:
        raise DataError(f"geomspace needs at least 2 points, got {k}")
    return np.geomspace(a, b, k)


@dataclass(frozen=True)
class GridSpec:
    alphas: tuple[float, ...]
    betas: tuple[float, ...]

    @classmethod
    def default(cls, raw_edge_count: int, points: int = GRID_POINTS) -> "GridSpec":
        if raw_edge_count < 1:
            raise DataError("raw graph has no edges; nothing to tune")
        alphas = 1.0 - geomspace(1.0 / raw_edge_count, 1.0, points)
        betas = geomspace(0.1, 1.0, points) - 0.1
        return cls(alphas=tuple(sorted(alphas)), betas=tuple(sorted(betas)))


@dataclass(frozen=True)
class GridCell:
    alpha: float
    beta: float
    score: float

    def to_json_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "continuous_f1": self.score}


def grid_search(
    subgraphs: Sequence[ConceptGraph],
    gold_val: ConceptGraph,
    embedder: Embedder,
    grid: GridSpec | None = None,
    root: str | None = None,
    include_root: bool = True,
    use_numba: bool | None = None,
) -> tuple[PruneConfig, list[GridCell]]:
    """Evaluate every grid cell and return the argmax config with the full table.

    Cells are visited in ascending (alpha, beta) order and a new best must
    score strictly higher, so ties resolve to the smallest alpha, then the
    smallest beta. A cell whose pruned graph comes out empty simply scores 0.
    The embedder memoizes label vectors, so the 441 evaluations share one
    embedding pass.
    """
    raw = sum_subgraphs(subgraphs)
    if root is None:
        root = subgraphs[0].root
    if grid is None:
        grid = GridSpec.default(len(raw.weights))
    cells: list[GridCell] = []
    best: GridCell | None = None
    for alpha in grid.alphas:
        for beta in grid.betas:
            pruned, _ = prune_weighted(raw, PruneConfig(alpha=alpha, beta=beta))
            pred = finalize_concept_graph(pruned, root)
            prf, _ = continuous_f1(
                gold_val, pred, embedder, include_root=include_root, use_numba=use_numba
            )
            cell = GridCell(alpha=float(alpha), beta=float(beta), score=prf.f1)
            cells.append(cell)
            if best is None or cell.score > best.score:
                best = cell
    assert best is not None
    logger.info(
        "grid search over %d cells: best alpha=%.6f beta=%.6f (continuous F1 %.4f)",
        len(cells),
        best.alpha,
        best.beta,
        best.score,
    )
    return PruneConfig(alpha=best.alpha, beta=best.beta), cells


def tuning_report(best: PruneConfig, cells: Sequence[GridCell], grid: GridSpec | None = None) -> dict:
    doc = {
        "best": best.to_dict(),
        "cells": [c.to_json_dict() for c in cells],
    }
    if grid is not None:
        doc["alphas"] = list(grid.alphas)
        doc["betas"] = list(grid.betas)
    return doc
