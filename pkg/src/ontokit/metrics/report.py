"""Full evaluation report: all five metrics plus the matchings behind them."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path as FsPath

from .._fileio import write_json_atomic, write_text_atomic
from ..embeddings import DEFAULT_SIMILARITY_THRESHOLD, Embedder
from ..errors import DataError
from ..graph import ConceptGraph
from .census import motif_distance
from .fscores import PRF, EdgeMatch, NodeMatch, continuous_f1, fuzzy_f1, graph_f1, literal_f1

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricReport:
    literal: PRF
    fuzzy: PRF
    continuous: PRF
    graph: PRF
    motif_distance: float
    edge_matching: tuple[EdgeMatch, ...] = ()
    node_matching: tuple[NodeMatch, ...] = ()
    flags: tuple[str, ...] = ()

    def headline(self) -> dict[str, float]:
        return {
            "literal_f1": self.literal.f1,
            "fuzzy_f1": self.fuzzy.f1,
            "continuous_f1": self.continuous.f1,
            "graph_f1": self.graph.f1,
            "motif_distance": self.motif_distance,
        }

    def to_json_dict(self) -> dict:
        return {
            "literal": self.literal.to_json_dict(),
            "fuzzy": self.fuzzy.to_json_dict(),
            "continuous": self.continuous.to_json_dict(),
            "graph": self.graph.to_json_dict(),
            "motif_distance": self.motif_distance,
            "edge_matching": [
                {"gold": list(ge), "pred": list(pe), "score": s}
                for ge, pe, s in self.edge_matching
            ],
            "node_matching": [
                {"gold": gn, "pred": pn, "score": s} for gn, pn, s in self.node_matching
            ],
            "flags": list(self.flags),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "MetricReport":
        def prf(section: dict) -> PRF:
            out = PRF(
                precision=float(section["precision"]),
                recall=float(section["recall"]),
                f1=float(section["f1"]),
                score=float(section["score"]) if "score" in section else None,
                degenerate=bool(section.get("degenerate", False)),
            )
            for value in (out.precision, out.recall, out.f1):
                if not 0.0 <= value <= 1.0:
                    raise DataError(f"metric value {value} outside [0, 1]")
            return out

        try:
            motif = float(doc["motif_distance"])
            if not 0.0 <= motif <= 1.0:
                raise DataError(f"motif distance {motif} outside [0, 1]")
            return cls(
                literal=prf(doc["literal"]),
                fuzzy=prf(doc["fuzzy"]),
                continuous=prf(doc["continuous"]),
                graph=prf(doc["graph"]),
                motif_distance=motif,
                edge_matching=tuple(
                    ((tuple(m["gold"]), tuple(m["pred"]), float(m["score"])))
                    for m in doc.get("edge_matching", ())
                ),
                node_matching=tuple(
                    (m["gold"], m["pred"], float(m["score"]))
                    for m in doc.get("node_matching", ())
                ),
                flags=tuple(doc.get("flags", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed metric report: {exc}") from exc

    def save(self, path: str | FsPath) -> None:
        write_json_atomic(path, self.to_json_dict())

    @classmethod
    def load(cls, path: str | FsPath) -> "MetricReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def evaluate(
    gold: ConceptGraph,
    pred: ConceptGraph,
    embedder: Embedder,
    t: float = DEFAULT_SIMILARITY_THRESHOLD,
    sgc_hops: int = 2,
    include_root: bool = True,
    include_disconnected_triads: bool = True,
    use_numba: bool | None = None,
) -> MetricReport:
    """Run all five metrics and collect the matchings for visualization.

    Individual metric failures (e.g. a graph too small for a triad census)
    are recorded as flags rather than raised.
    """
    flags: list[str] = []
    lit = literal_f1(gold, pred, include_root=include_root)
    fuz = fuzzy_f1(gold, pred, embedder, t=t, include_root=include_root)
    cont, edge_matching = continuous_f1(
        gold, pred, embedder, include_root=include_root, use_numba=use_numba
    )
    gra, node_matching = graph_f1(
        gold, pred, embedder, k=sgc_hops, include_root=include_root, use_numba=use_numba
    )
    for name, prf in (("literal", lit), ("fuzzy", fuz), ("continuous", cont), ("graph", gra)):
        if prf.degenerate:
            flags.append(f"{name}: empty edge or node set; undefined ratio reported as 0")
    try:
        motif = motif_distance(
            gold, pred, include_disconnected=include_disconnected_triads, use_numba=use_numba
        )
    except DataError as exc:
        flags.append(f"motif: {exc}")
        motif = float("nan")
    return MetricReport(
        literal=lit,
        fuzzy=fuz,
        continuous=cont,
        graph=gra,
        motif_distance=motif,
        edge_matching=tuple(edge_matching),
        node_matching=tuple(node_matching),
        flags=tuple(flags),
    )


def _dot_quote(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_matching_dot(gold: ConceptGraph, pred: ConceptGraph, report: MetricReport) -> str:
    """Graphviz rendering of both graphs with their matchings.

    Gold is drawn black, the prediction teal. Node matches are dashed red
    cross-edges; edge matches are dashed orange cross-edges drawn between
    the child endpoints of the matched edges. Opacity scales with the match
    score.
    """
    lines = ["digraph matching {", "  rankdir=LR;", "  node [shape=box];"]
    gid = {n: f"g{i}" for i, n in enumerate(gold.sorted_nodes)}
    pid = {n: f"p{i}" for i, n in enumerate(pred.sorted_nodes)}
    lines.append("  subgraph cluster_gold {")
    lines.append('    label="gold"; color=black;')
    for n in gold.sorted_nodes:
        lines.append(f"    {gid[n]} [label={_dot_quote(n)}];")
    for u, v in gold.sorted_edges:
        lines.append(f"    {gid[u]} -> {gid[v]};")
    lines.append("  }")
    lines.append("  subgraph cluster_pred {")
    lines.append('    label="predicted"; color=teal;')
    for n in pred.sorted_nodes:
        lines.append(f"    {pid[n]} [label={_dot_quote(n)}, color=teal, fontcolor=teal];")
    for u, v in pred.sorted_edges:
        lines.append(f"    {pid[u]} -> {pid[v]} [color=teal];")
    lines.append("  }")

    def alpha(score: float) -> str:
        return f"{max(0, min(255, int(round(score * 255)))):02X}"

    for gn, pn, s in report.node_matching:
        if gn in gid and pn in pid:
            lines.append(
                f"  {gid[gn]} -> {pid[pn]} "
                f'[style=dashed, dir=none, constraint=false, color="#FF0000{alpha(s)}"];'
            )
    for (gu, gv), (pu, pv), s in report.edge_matching:
        if gv in gid and pv in pid:
            lines.append(
                f"  {gid[gv]} -> {pid[pv]} "
                f'[style=dashed, dir=none, constraint=false, color="#FF8C00{alpha(s)}", '
                f"tooltip={_dot_quote(f'{gu} -> {gv} ~ {pu} -> {pv}')}];"
            )
    lines.append("}")
    return "\n".join(lines)


def save_matching_dot(
    gold: ConceptGraph, pred: ConceptGraph, report: MetricReport, path: str | FsPath
) -> None:
    write_text_atomic(path, export_matching_dot(gold, pred, report))
