from brainbench.interpret.graph_metrics import (
    GraphPropertyReport,
    NullConfig,
    graph_from_edges,
    graph_properties,
    mean_connected_path,
    small_worldness,
    subgraph_metrics,
)
from brainbench.interpret.maps import (
    EdgeImportanceMap,
    MapKind,
    NodeImportance,
    NodeMode,
    aggregate_attention,
    lm_weight_map,
    mean_attention_map,
    node_importance,
    signed_weight_map,
    top_edges,
)
from brainbench.interpret.report import InterpretBundle, interpret_maps, interpret_model, write_bundle
from brainbench.interpret.systems import (
    SYSTEMS,
    SystemAtlas,
    SystemBlocks,
    chord_counts,
    load_atlas,
    map_rois_to_systems,
)
