"""Community-aware node-role analytics for directed graphs.

Workflow: ingest a directed edge list, detect communities with a directed
Louvain (or load a precomputed partition), compute eight community-relative
role measures per node, discover roles by a k-means sweep selected with the
Davies-Bouldin index, then characterize node populations (e.g. social
capitalists) by role.
"""

__version__ = "0.1.0"

from .clustering import (ClusteringConfig, ClusterResult, davies_bouldin,
                         kmeans, select_k, sweep_k)
from .community import (LouvainResult, ModularityConfig, directed_modularity,
                        louvain_directed, read_partition, write_partition)
from .graph import (DataError, DirectedGraph, EdgeListParseError, Partition,
                    PartitionError, community_degree, degree_split,
                    external_community_profile, load_edge_list, load_graph)
from .measures import (MEASURE_NAMES, RAW_NAMES, community_zscore,
                       compute_measures, correlation_matrix, measure_vectors,
                       participation, participation_all,
                       participation_from_counts, raw_features,
                       threshold_role_inputs)
from .pipeline import PipelineConfig, PipelineResult, StageError, run_pipeline
from .roles import (AnovaReport, CapitalistCategory, CrosstabResult,
                    DegreeBand, GroupProfile, RatioBand, RoleThresholds,
                    anova_bonferroni, categorize_capitalist, crosstab,
                    group_profiles, label_clusters, threshold_roles)
from .synth import PlantedRole, SynthParams, generate_arcs, synth_generate

__all__ = [
    "__version__",
    "AnovaReport", "CapitalistCategory", "ClusteringConfig", "ClusterResult",
    "CrosstabResult", "DataError", "DegreeBand", "DirectedGraph",
    "EdgeListParseError", "GroupProfile", "LouvainResult", "MEASURE_NAMES",
    "ModularityConfig", "Partition", "PartitionError", "PipelineConfig",
    "PipelineResult", "PlantedRole", "RAW_NAMES", "RatioBand",
    "RoleThresholds", "StageError", "SynthParams",
    "anova_bonferroni", "categorize_capitalist", "community_degree",
    "community_zscore", "compute_measures", "correlation_matrix", "crosstab",
    "davies_bouldin", "degree_split", "directed_modularity",
    "external_community_profile", "generate_arcs", "group_profiles", "kmeans",
    "label_clusters", "load_edge_list", "load_graph", "louvain_directed",
    "measure_vectors", "participation", "participation_all",
    "participation_from_counts", "raw_features", "read_partition",
    "run_pipeline", "select_k", "sweep_k", "synth_generate",
    "threshold_role_inputs", "threshold_roles", "write_partition",
]
