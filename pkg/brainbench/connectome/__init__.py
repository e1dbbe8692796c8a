from brainbench.connectome.connectivity import (
    ConnectivityMatrix,
    ConnectomeWarning,
    FeatureVector,
    NodeFeatureMatrix,
    TimeSeriesMatrix,
    connection_profiles,
    devectorize,
    n_pairs,
    pearson_connectivity,
    pearson_connectivity_batch,
    vectorize_batch,
    vectorize_upper,
)
from brainbench.connectome.threshold import (
    BrainGraph,
    SignMode,
    edge_budget,
    threshold_batch,
    threshold_top_k,
)
