#!/usr/bin/env python3
"""Benchmark the numba and numpy builds of the hot kernels.

Times the assignment solver on dense random score matrices and the triad
census on random digraphs, checks that both builds agree, and prints a
speedup table. The numba build is warmed up first so JIT compilation is
not charged to the measurement.

Usage:
    python benchmarks/bench_kernels.py [--assign-sizes 100,200,400]
                                       [--census-sizes 200,400,800] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ontokit._accel import numba_available
from ontokit.graph import ConceptGraph
from ontokit.metrics.assignment import solve_assignment
from ontokit.metrics.census import triad_census


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def random_graph(rng: np.random.Generator, n: int, avg_degree: float = 4.0) -> ConceptGraph:
    labels = [f"n{i}" for i in range(n)]
    edges = set()
    for _ in range(int(n * avg_degree)):
        a, b = rng.integers(0, n, 2)
        if a != b:
            edges.add((labels[a], labels[b]))
    return ConceptGraph(root=labels[0], nodes=frozenset(labels), edges=frozenset(edges))


def bench_assignment(sizes: list[int], repeat: int, rng: np.random.Generator) -> None:
    print(f"{'assignment':<12} {'size':>6} {'numba (s)':>12} {'numpy (s)':>12} {'speedup':>9}")
    for k in sizes:
        scores = rng.uniform(-0.2, 1.0, size=(k, k))
        solve_assignment(scores[:8, :8], use_numba=True)  # warm the JIT
        _, t_jit_total = solve_assignment(scores, use_numba=True)
        _, t_np_total = solve_assignment(scores, use_numba=False)
        assert abs(t_jit_total - t_np_total) < 1e-6 * max(1.0, abs(t_np_total))
        t_jit = _time(lambda: solve_assignment(scores, use_numba=True), repeat)
        t_np = _time(lambda: solve_assignment(scores, use_numba=False), repeat)
        print(f"{'':<12} {k:>6} {t_jit:>12.4f} {t_np:>12.4f} {t_np / t_jit:>8.1f}x")


def bench_census(sizes: list[int], repeat: int, rng: np.random.Generator) -> None:
    print(f"{'census':<12} {'nodes':>6} {'numba (s)':>12} {'python (s)':>12} {'speedup':>9}")
    for n in sizes:
        g = random_graph(rng, n)
        triad_census(random_graph(rng, 10), use_numba=True)  # warm the JIT
        c_jit = triad_census(g, use_numba=True).counts
        c_py = triad_census(g, use_numba=False).counts
        assert np.array_equal(c_jit, c_py)
        t_jit = _time(lambda: triad_census(g, use_numba=True), repeat)
        t_py = _time(lambda: triad_census(g, use_numba=False), repeat)
        print(f"{'':<12} {n:>6} {t_jit:>12.4f} {t_py:>12.4f} {t_py / t_jit:>8.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--assign-sizes", default="100,200,400")
    parser.add_argument("--census-sizes", default="200,400,800")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if not numba_available():
        print("numba is not importable; only the fallback build will be meaningful")
    rng = np.random.default_rng(args.seed)
    bench_assignment([int(s) for s in args.assign_sizes.split(",")], args.repeat, rng)
    print()
    bench_census([int(s) for s in args.census_sizes.split(",")], args.repeat, rng)


if __name__ == "__main__":
    main()
