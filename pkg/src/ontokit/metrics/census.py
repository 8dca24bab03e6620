"""Directed triad census and the motif distance built on it.

Every unordered node triple falls into one of the 16 directed 3-node
isomorphism classes. Connected triples are counted by iterating edges
(the subquadratic Batagelj-Mrvar scheme); the disconnected classes are
obtained analytically from the complement, so the census runs far below
the O(n^3) of naive triple enumeration.

Like the assignment solver, the census has a numba build (CSR arrays,
binary-search adjacency tests) and a plain Python build (dict-of-sets),
selected per call or via ``ONTOKIT_NO_NUMBA``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._accel import jit_compile, resolve_use_numba
from ..errors import DataError
from ..graph import ConceptGraph

#: Name per isomorphism class, standard MAN (mutual/asymmetric/null) labels.
TRIAD_NAMES = (
    "003", "012", "102", "021D", "021U", "021C", "111D", "111U",
    "030T", "030C", "201", "120D", "120U", "120C", "210", "300",
)

#: Class (1-based index into TRIAD_NAMES) for each 6-bit edge configuration
#: of an ordered triple (v, u, w); bit k set means the k-th of the ordered
#: pairs (v,u),(u,v),(v,w),(w,v),(u,w),(w,u) is an edge.
TRICODES = (
    1, 2, 2, 3, 2, 4, 6, 8, 2, 6, 5, 7, 3, 8, 7, 11, 2, 6, 4, 8, 5, 9,
    9, 13, 6, 10, 9, 14, 7, 14, 12, 15, 2, 5, 6, 7, 6, 9, 10, 14, 4, 9,
    9, 12, 8, 13, 14, 15, 3, 7, 8, 11, 7, 12, 14, 15, 8, 14, 13, 15,
    11, 15, 15, 16,
)

_TRICODES_ARR = np.asarray(TRICODES, dtype=np.int64)

#: Indices of the classes whose three nodes are weakly connected.
CONNECTED_CLASS_INDICES = tuple(range(3, 16))


def _census_loops(n, s_indptr, s_ind, u_indptr, u_ind, tricodes):
    """Edge-iteration census over CSR adjacency; numba-compilable as-is."""

    def has_succ(a, b):
        lo = s_indptr[a]
        hi = s_indptr[a + 1]
        while lo < hi:
            mid = (lo + hi) >> 1
            if s_ind[mid] < b:
                lo = mid + 1
            else:
                hi = mid
        return lo < s_indptr[a + 1] and s_ind[lo] == b

    def has_und(a, b):
        lo = u_indptr[a]
        hi = u_indptr[a + 1]
        while lo < hi:
            mid = (lo + hi) >> 1
            if u_ind[mid] < b:
                lo = mid + 1
            else:
                hi = mid
        return lo < u_indptr[a + 1] and u_ind[lo] == b

    counts = np.zeros(16, dtype=np.int64)
    buf = np.empty(n, dtype=np.int64)
    for v in range(n):
        for t in range(u_indptr[v], u_indptr[v + 1]):
            u = u_ind[t]
            if u <= v:
                continue
            # merged sorted union of the two neighbourhoods, minus {u, v}
            a = u_indptr[v]
            a_end = u_indptr[v + 1]
            b = u_indptr[u]
            b_end = u_indptr[u + 1]
            cnt = 0
            while a < a_end or b < b_end:
                if a < a_end and (b >= b_end or u_ind[a] <= u_ind[b]):
                    w = u_ind[a]
                    if b < b_end and u_ind[b] == w:
                        b += 1
                    a += 1
                else:
                    w = u_ind[b]
                    b += 1
                if w != u and w != v:
                    buf[cnt] = w
                    cnt += 1
            # triples whose third node touches neither: a lone dyad
            if has_succ(u, v) and has_succ(v, u):
                counts[2] += n - cnt - 2
            else:
                counts[1] += n - cnt - 2
            for bi in range(cnt):
                w = buf[bi]
                if u < w or (v < w and w < u and not has_und(v, w)):
                    code = 0
                    if has_succ(v, u):
                        code += 1
                    if has_succ(u, v):
                        code += 2
                    if has_succ(v, w):
                        code += 4
                    if has_succ(w, v):
                        code += 8
                    if has_succ(u, w):
                        code += 16
                    if has_succ(w, u):
                        code += 32
                    counts[tricodes[code] - 1] += 1
    total = n * (n - 1) * (n - 2) // 6
    counts[0] = total - counts[1:].sum()
    return counts


_census_jit = None


def _get_jit_census():
    global _census_jit
    if _census_jit is None:
        _census_jit = jit_compile(_census_loops)
    return _census_jit


def _census_python(n: int, succ: list[set], pred: list[set]) -> np.ndarray:
    """Same counting scheme on plain sets; the no-numba build."""
    und = [succ[v] | pred[v] for v in range(n)]
    counts = np.zeros(16, dtype=np.int64)
    for v in range(n):
        for u in und[v]:
            if u <= v:
                continue
            neighbors = (und[v] | und[u]) - {u, v}
            if u in succ[v] and v in succ[u]:
                counts[2] += n - len(neighbors) - 2
            else:
                counts[1] += n - len(neighbors) - 2
            for w in neighbors:
                if u < w or (v < w < u and w not in und[v]):
                    code = (
                        (u in succ[v])
                        + 2 * (v in succ[u])
                        + 4 * (w in succ[v])
                        + 8 * (v in succ[w])
                        + 16 * (w in succ[u])
                        + 32 * (u in succ[w])
                    )
                    counts[TRICODES[code] - 1] += 1
    total = n * (n - 1) * (n - 2) // 6
    counts[0] = total - counts[1:].sum()
    return counts


@dataclass(eq=False)
class TriadDistribution:
    """Counts and probabilities over the 16 triad classes."""

    counts: np.ndarray
    include_disconnected: bool = True
    probabilities: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (16,) or counts.min() < 0:
            raise DataError("triad counts must be 16 non-negative integers")
        self.counts = counts
        if self.include_disconnected:
            masked = counts.astype(np.float64)
        else:
            masked = np.zeros(16, dtype=np.float64)
            for i in CONNECTED_CLASS_INDICES:
                masked[i] = counts[i]
        total = masked.sum()
        if total <= 0:
            raise DataError("no triads in the selected classes; distribution undefined")
        self.probabilities = masked / total

    def as_dict(self) -> dict[str, float]:
        return {name: float(p) for name, p in zip(TRIAD_NAMES, self.probabilities)}


def triad_census(
    g: ConceptGraph,
    include_disconnected: bool = True,
    use_numba: bool | None = None,
) -> TriadDistribution:
    """Distribution of the directed 3-node subgraph classes of ``g``.

    Self-loops are ignored (triad classes are defined on simple digraphs).
    With ``include_disconnected=False`` the distribution is renormalized
    over the 13 weakly connected classes only.
    """
    labels = g.sorted_nodes
    n = len(labels)
    if n < 3:
        raise DataError(f"triad census needs at least 3 nodes, got {n}")
    index = {lab: i for i, lab in enumerate(labels)}
    succ: list[set] = [set() for _ in range(n)]
    pred: list[set] = [set() for _ in range(n)]
    for a, b in g.edges:
        if a == b:
            continue
        succ[index[a]].add(index[b])
        pred[index[b]].add(index[a])
    if resolve_use_numba(use_numba):
        s_indptr = np.zeros(n + 1, dtype=np.int64)
        u_indptr = np.zeros(n + 1, dtype=np.int64)
        s_rows = []
        u_rows = []
        for v in range(n):
            und = succ[v] | pred[v]
            s_sorted = np.fromiter(sorted(succ[v]), dtype=np.int64, count=len(succ[v]))
            u_sorted = np.fromiter(sorted(und), dtype=np.int64, count=len(und))
            s_rows.append(s_sorted)
            u_rows.append(u_sorted)
            s_indptr[v + 1] = s_indptr[v] + len(s_sorted)
            u_indptr[v + 1] = u_indptr[v] + len(u_sorted)
        s_ind = np.concatenate(s_rows) if s_rows else np.empty(0, dtype=np.int64)
        u_ind = np.concatenate(u_rows) if u_rows else np.empty(0, dtype=np.int64)
        counts = _get_jit_census()(n, s_indptr, s_ind, u_indptr, u_ind, _TRICODES_ARR)
    else:
        counts = _census_python(n, succ, pred)
    return TriadDistribution(counts=counts, include_disconnected=include_disconnected)


def motif_distance(
    gold: ConceptGraph,
    pred: ConceptGraph,
    include_disconnected: bool = True,
    use_numba: bool | None = None,
) -> float:
    """Total variation distance between the two graphs' triad distributions."""
    dg = triad_census(gold, include_disconnected=include_disconnected, use_numba=use_numba)
    dp = triad_census(pred, include_disconnected=include_disconnected, use_numba=use_numba)
    return float(0.5 * np.abs(dg.probabilities - dp.probabilities).sum())
