"""Gold-standard graph-similarity metrics and their supporting machinery."""

from .assignment import Matching, solve_assignment
from .census import (
    CONNECTED_CLASS_INDICES,
    TRIAD_NAMES,
    TRICODES,
    TriadDistribution,
    motif_distance,
    triad_census,
)
from .fscores import PRF, continuous_f1, fuzzy_f1, graph_f1, harmonic_f1, literal_f1
from .report import MetricReport, evaluate, export_matching_dot, save_matching_dot
from .sgc import sgc_embeddings, sgc_matrix

__all__ = [
    "CONNECTED_CLASS_INDICES",
    "Matching",
    "MetricReport",
    "PRF",
    "TRIAD_NAMES",
    "TRICODES",
    "TriadDistribution",
    "continuous_f1",
    "evaluate",
    "export_matching_dot",
    "fuzzy_f1",
    "graph_f1",
    "harmonic_f1",
    "literal_f1",
    "motif_distance",
    "save_matching_dot",
    "sgc_embeddings",
    "sgc_matrix",
    "solve_assignment",
    "triad_census",
]
