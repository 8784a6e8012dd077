"""centclust: posterior sampling of data clusterings under a Dirichlet process
normal mixture, with central-clustering and credible-region summaries."""

from .clusterings import (
    Clustering,
    ContingencyTable,
    canonicalize,
    contingency_table,
    num_clusters,
)
from .data import (
    Dataset,
    feature_subset,
    generate_mixture_1d,
    load_dataset,
    save_dataset,
)
from .kmeans import kmeans
from .manifest import RunManifest, load_manifest, replay_manifest, write_manifest
from .metrics import (
    DistanceResult,
    approx_distance,
    distance_matrix,
    distance_upper_bound,
    exact_distance,
    table_approx_distance,
    table_exact_distance,
)
from .sampler import ModelConfig, run_chain
from .summaries import (
    ModeReport,
    RegionReport,
    cluster_count_distribution,
    conditional_central_clustering,
    credible_region,
    detect_modes,
    empirical_central_clustering,
    filter_trace_by_k,
    hpd_region,
    median_clustering,
    quantile_clustering,
    region_contains,
    trace_distance_matrix,
)
from .trace import (
    ClusteringTrace,
    TraceEntry,
    TraceMeta,
    load_clustering_file,
    load_trace,
    save_clustering_file,
    save_trace,
)

__version__ = "0.1.0"
