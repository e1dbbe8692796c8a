"""Network-neuroscience metrics of a binarized top-edge subgraph."""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import List

import networkx as nx
import numpy as np
from joblib import Parallel, delayed

from brainbench.connectome.connectivity import warn
from brainbench.interpret.maps import top_edges

logger = logging.getLogger(__name__)

METRICS = ('clustering_coefficient', 'modularity', 'avg_shortest_path', 'global_efficiency',
           'small_worldness', 'assortativity')


@dataclass(frozen=True)
class NullConfig:
    """Degree-preserving rewired null ensemble for small-worldness."""
    n_nulls: int = 10
    rewires_per_edge: int = 20
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_nulls < 0 or self.rewires_per_edge < 1:
            raise ValueError('n_nulls must be >= 0 and rewires_per_edge >= 1, got %d, %d'
                             % (self.n_nulls, self.rewires_per_edge))


@dataclass
class GraphPropertyReport:
    degree_histogram: List[int]
    clustering_coefficient: float
    modularity: float
    avg_shortest_path: float
    global_efficiency: float
    small_worldness: float
    assortativity: float
    n_edges: int
    n_nodes: int
    partition: List[List[int]] = field(default_factory=list)
    louvain_seed: int = 0
    null_seed: int = 0
    undefined: List[str] = field(default_factory=list)

    def to_dict(self):
        out = asdict(self)
        for name in METRICS:
            # JSON has no NaN
            if math.isnan(out[name]):
                out[name] = None
        return out


def graph_from_edges(edges):
    """Undirected unweighted graph over the endpoints of (i, j, value) edges."""
    graph = nx.Graph()
    graph.add_edges_from((i, j) for i, j, _ in edges)
    return graph


def mean_connected_path(graph):
    """Mean shortest-path length over connected pairs only; NaN if none."""
    total, pairs = 0, 0
    for source, lengths in nx.all_pairs_shortest_path_length(graph):
        for target, d in lengths.items():
            if d > 0:
                total += d
                pairs += 1
    return total / pairs if pairs else float('nan')


def _assortativity(graph):
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', RuntimeWarning)
        value = nx.degree_assortativity_coefficient(graph)
    return float(value)


def _rewired_stats(graph, nswap, seed):
    null = graph.copy()
    nx.double_edge_swap(null, nswap=nswap, max_tries=nswap * 100, seed=seed)
    return nx.average_clustering(null), mean_connected_path(null)


def small_worldness(graph, clustering, path_length, null_config):
    """sigma = (C / C_null) / (L / L_null) against degree-preserving edge swaps.

    NaN when the graph cannot be rewired or a ratio is undefined.
    """
    m = graph.number_of_edges()
    if null_config.n_nulls == 0 or m < 2 or graph.number_of_nodes() < 4:
        return float('nan')
    seeds = [null_config.seed + r for r in range(null_config.n_nulls)]
    try:
        stats = Parallel(n_jobs=null_config.n_jobs)(
            delayed(_rewired_stats)(graph, null_config.rewires_per_edge * m, s) for s in seeds)
    except (nx.NetworkXError, nx.NetworkXAlgorithmError) as e:
        logger.warning('null rewiring failed: %s', e)
        return float('nan')
    c_null = np.mean([c for c, _ in stats])
    l_null = np.mean([l for _, l in stats])
    if c_null == 0 or not np.isfinite(l_null) or path_length == 0 or not np.isfinite(path_length):
        return float('nan')
    return float((clustering / c_null) / (path_length / l_null))


def graph_properties(graph, null_config=NullConfig(), louvain_seed=0):
    n_edges = graph.number_of_edges()
    n_nodes = graph.number_of_nodes()
    if n_edges == 0:
        warn('empty edge set; graph metrics are undefined')
        nan = float('nan')
        return GraphPropertyReport(nx.degree_histogram(graph), nan, nan, nan, nan, nan, nan, 0, n_nodes,
                                   louvain_seed=louvain_seed, null_seed=null_config.seed,
                                   undefined=list(METRICS))

    clustering = float(nx.average_clustering(graph))
    communities = nx.community.louvain_communities(graph, seed=louvain_seed)
    modularity = float(nx.community.modularity(graph, communities))
    path = mean_connected_path(graph)
    report = GraphPropertyReport(
        degree_histogram=nx.degree_histogram(graph),
        clustering_coefficient=clustering,
        modularity=modularity,
        avg_shortest_path=path,
        global_efficiency=float(nx.global_efficiency(graph)),
        small_worldness=small_worldness(graph, clustering, path, null_config),
        assortativity=_assortativity(graph),
        n_edges=n_edges,
        n_nodes=n_nodes,
        partition=sorted(sorted(int(v) for v in c) for c in communities),
        louvain_seed=louvain_seed,
        null_seed=null_config.seed,
    )
    report.undefined = [name for name in METRICS if math.isnan(getattr(report, name))]
    if report.undefined:
        logger.info('undefined graph metrics: %s', ', '.join(report.undefined))
    return report


def subgraph_metrics(edge_map, fraction, null_config=NullConfig(), louvain_seed=0):
    """GraphPropertyReport of the binarized graph on the top `fraction`% edges."""
    edges = top_edges(edge_map, fraction)
    # zero-valued entries are not connections
    edges = [e for e in edges if e[2] != 0]
    logger.info('%s subgraph at %g%%: %d edges', edge_map.kind.value, fraction, len(edges))
    return graph_properties(graph_from_edges(edges), null_config, louvain_seed)
