"""ontokit: build, prune, and score concept taxonomies from document corpora.

The pipeline: pair documents with relevant subgraphs of a rooted ontology,
linearize them into training sequences with frequency-masked targets, parse
generated subgraphs back, aggregate and prune them into a predicted
ontology, and score it against a gold standard with five graph-similarity
metrics.
"""

from .aggregate import (
    PruneConfig,
    absolute_threshold,
    cleanup_isolated,
    post_process,
    prune_inverse_edges,
    prune_self_loops,
    prune_weighted,
    relative_threshold,
    remove_cycles_greedy,
    sum_subgraphs,
)
from .baselines import memorisation_graph, run_prompting_baseline
from .dataset import (
    DocumentRecord,
    OntologySplit,
    SubgraphSample,
    build_samples,
    choose_path_length,
    edge_coverage,
    load_corpus,
    split_ontology,
)
from .embeddings import (
    DEFAULT_SIMILARITY_THRESHOLD,
    DeterministicEmbedder,
    Embedder,
    FileCachedEmbedder,
    HttpEmbedder,
    cosine_matrix,
    nodesim,
    open_embedder,
)
from .errors import DataError, NetworkError, OntokitError
from .graph import (
    ConceptGraph,
    WeightedGraph,
    build_concept_graph,
    enumerate_paths,
    induced_subgraph,
)
from .metrics import (
    MetricReport,
    TriadDistribution,
    continuous_f1,
    evaluate,
    fuzzy_f1,
    graph_f1,
    literal_f1,
    motif_distance,
    sgc_embeddings,
    solve_assignment,
    triad_census,
)
from .sequence import (
    ParsedGeneration,
    RelationFrequencyTable,
    TrainingSequence,
    annotate_masks,
    build_frequency_table,
    linearize,
    mask_probability,
    parse_generation,
    render_prompt,
)
from .tuner import GridSpec, geomspace, grid_search

__version__ = "0.1.0"
