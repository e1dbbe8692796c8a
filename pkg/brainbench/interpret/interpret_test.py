import itertools
import json
import os

import networkx as nx
import numpy as np
import pytest

from brainbench.connectome import ConnectomeWarning, n_pairs
from brainbench.data_io import ConnectomeArrays, SplitSpec, Task, split_indices
from brainbench.dual_pathway import DualSpec, EncoderSpec, build_dual_model, load_checkpoint, save_checkpoint
from brainbench.graph_models import GNNSpec, TrainConfig, fit_model
from brainbench.interpret import (
    SYSTEMS,
    EdgeImportanceMap,
    MapKind,
    NodeMode,
    NullConfig,
    SystemAtlas,
    aggregate_attention,
    chord_counts,
    graph_properties,
    interpret_model,
    lm_weight_map,
    load_atlas,
    map_rois_to_systems,
    mean_attention_map,
    node_importance,
    signed_weight_map,
    subgraph_metrics,
    top_edges,
    write_bundle,
)

TINY = DualSpec(EncoderSpec(out_dim=4, channels=3, seed=1), GNNSpec('gat', n_layers=2, hidden_dim=3,
                                                                    heads=2, density=30.0, seed=2), seed=3)
NO_NULLS = NullConfig(n_nulls=0)


def _attention_map(upper, n):
    values = np.zeros((n, n))
    rows, cols = np.triu_indices(n, k=1)
    values[rows, cols] = upper
    return EdgeImportanceMap(values + values.T, MapKind.ATTENTION)


def _graph(n, edges):
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(edges)
    return graph


@pytest.fixture(scope='module')
def trained_dual(small_dataset):
    arrays = ConnectomeArrays.from_dataset(small_dataset)
    train_a, val_a, test_a = split_indices(len(arrays), SplitSpec(seed=2)).arrays(arrays)
    model = build_dual_model(TINY, arrays.n_roi, arrays.bold.shape[-1], Task.BINARY_CLASSIFICATION)
    fit_model(model, train_a, val_a, TrainConfig(epochs=2, batch_size=8))
    return model, test_a


def test_two_node_attention_normalizes_to_one():
    for attention in ([[0.1, 0.9], [0.6, 0.4]], [[0.7, 0.3], [0.2, 0.8]]):
        edge_map = aggregate_attention(np.array([[attention]]))
        np.testing.assert_array_equal(edge_map.values, [[0.0, 1.0], [1.0, 0.0]])


def test_constant_attention_gives_zero_map():
    with pytest.warns(ConnectomeWarning, match='constant'):
        edge_map = aggregate_attention(np.full((2, 1, 3, 3), 1 / 3))
    assert not np.any(edge_map.values)


def test_three_node_attention_hand_values():
    a = np.array([[0.5, 0.25, 0.25], [0.2, 0.6, 0.2], [0.1, 0.3, 0.6]])
    # two samples with two heads each averaging to `a`
    stack = np.stack([np.stack([a + 0.05, a - 0.05]), np.stack([a, a])])
    edge_map = aggregate_attention(stack)
    # symmetrized off-diagonal entries 0.225, 0.175, 0.25; the self-attention diagonal is ignored
    low, span = 0.175, 0.25 - 0.175
    expected = np.array([[0, (0.225 - low) / span, 0], [(0.225 - low) / span, 0, 1], [0, 1, 0]])
    np.testing.assert_allclose(edge_map.values, expected, rtol=1e-9, atol=1e-9)
    assert edge_map.normalization == 'minmax_01'


@pytest.mark.parametrize('seed', range(5))
def test_strongest_edge_maps_to_one_under_dominant_diagonal(seed):
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.0, 0.1, size=(3, 2, 4, 4)) + 5.0 * np.eye(4)
    values = aggregate_attention(raw).values
    off_diagonal = values[np.triu_indices(4, k=1)]
    assert off_diagonal.max() == 1.0
    assert off_diagonal.min() == 0.0
    assert not np.any(np.diag(values))


def test_mean_attention_map_is_batch_independent(trained_dual):
    model, test_a = trained_dual
    a = mean_attention_map(model, test_a)
    b = mean_attention_map(model, test_a, batch_size=3)
    np.testing.assert_allclose(a.values, b.values, atol=1e-12)
    assert np.array_equal(a.values, a.values.T)
    assert a.values.min() >= 0 and a.values.max() <= 1


def test_mean_attention_map_rejects_empty_set(trained_dual):
    model, test_a = trained_dual
    with pytest.raises(ValueError, match='nonempty'):
        mean_attention_map(model, test_a.take(np.array([], dtype=int)))


def _regression_model_with_u_weights(u_weights):
    model = build_dual_model(TINY, 6, 16, Task.REGRESSION)
    kernel = model.head_kernel.numpy()
    kernel[model.u_rows, 0] = u_weights
    model.head_kernel.assign(kernel)
    return model


def test_single_lm_weight_maps_to_unit_entry():
    w = np.zeros(n_pairs(6))
    w[11] = -0.3  # pair (2, 5)
    edge_map = lm_weight_map(_regression_model_with_u_weights(w))
    expected = np.zeros((6, 6))
    expected[2, 5] = expected[5, 2] = -1.0
    np.testing.assert_array_equal(edge_map.values, expected)
    assert edge_map.normalization == 'maxabs_pm1'


def test_lm_weight_map_is_scale_invariant():
    w = np.random.default_rng(0).standard_normal(n_pairs(6))
    a = lm_weight_map(_regression_model_with_u_weights(w))
    b = lm_weight_map(_regression_model_with_u_weights(3.5 * w))
    np.testing.assert_allclose(a.values, b.values, atol=1e-12)
    assert top_edges(a, 20) == top_edges(b, 20)


def test_equal_class_weights_give_zero_map():
    model = build_dual_model(TINY, 6, 16, Task.BINARY_CLASSIFICATION)
    kernel = model.head_kernel.numpy()
    kernel[model.u_rows, 1] = kernel[model.u_rows, 0]
    model.head_kernel.assign(kernel)
    with pytest.warns(ConnectomeWarning, match='all zero'):
        edge_map = lm_weight_map(model)
    assert not np.any(edge_map.values)


@pytest.mark.parametrize('fraction, expected', [(0.1, 65), (5, 3231), (100, 64620)])
def test_top_edge_counts_at_360_rois(fraction, expected):
    upper = np.random.default_rng(1).uniform(size=n_pairs(360))
    assert len(top_edges(_attention_map(upper, 360), fraction)) == expected


def test_top_edges_rank_weights_by_magnitude_with_lexicographic_ties():
    edge_map = signed_weight_map([0.5, -1.0, 0.5, 0.2, -0.5, 0.1], 4)
    assert [(i, j) for i, j, _ in top_edges(edge_map, 50)] == [(0, 2), (0, 1), (0, 3)]
    assert top_edges(edge_map, 50)[0][2] == -1.0


def test_top_edges_rejects_bad_fraction():
    with pytest.raises(ValueError):
        top_edges(_attention_map([1.0], 2), 0)


def test_star_map_center_is_most_important():
    edge_map = _attention_map([1, 1, 1, 1, 0, 0, 0, 0, 0, 0], 5)
    nodes = node_importance(edge_map, NodeMode.ATTENTION_ROWSUM)
    assert nodes.top_k_indices[0] == 0
    assert nodes.scores[0] > nodes.scores[1:].max()
    assert nodes.top_k_indices == [0, 1, 2, 3, 4]


def test_negative_map_has_no_positive_importance():
    edge_map = signed_weight_map([-0.5, -1.0, -0.25], 3)
    assert not np.any(node_importance(edge_map, 'positive_weights').scores)
    np.testing.assert_allclose(node_importance(edge_map, 'negative_weights').scores, [1.5, 0.75, 1.25])


def test_three_node_row_sums():
    edge_map = _attention_map([0.2, 0.7, 1.0], 3)
    nodes = node_importance(edge_map, 'attention_rowsum')
    np.testing.assert_array_equal(nodes.scores, [0.2 + 0.7, 0.2 + 1.0, 0.7 + 1.0])
    assert nodes.top_k_indices == [2, 1, 0]


def test_node_mode_must_match_map_kind():
    with pytest.raises(ValueError, match='needs an lm_weight map'):
        node_importance(_attention_map([0.5], 2), 'positive_weights')
    with pytest.raises(ValueError, match='needs an attention map'):
        node_importance(signed_weight_map([0.5], 2), 'attention_rowsum')


def test_triangle_metrics():
    report = graph_properties(_graph(3, [(0, 1), (1, 2), (0, 2)]), NO_NULLS)
    assert report.clustering_coefficient == 1.0
    assert report.global_efficiency == 1.0
    assert report.avg_shortest_path == 1.0
    assert report.degree_histogram == [0, 0, 3]


def test_path_metrics():
    report = graph_properties(_graph(3, [(0, 1), (1, 2)]), NO_NULLS)
    assert report.clustering_coefficient == 0.0
    assert report.global_efficiency == pytest.approx(2.5 / 3, abs=1e-12)
    assert report.avg_shortest_path == pytest.approx(4 / 3, abs=1e-12)


def test_two_triangles_modularity():
    report = graph_properties(_graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]), NO_NULLS)
    assert report.partition == [[0, 1, 2], [3, 4, 5]]
    assert report.modularity == pytest.approx(0.5, abs=1e-12)
    assert report.global_efficiency == pytest.approx(6 / 15, abs=1e-12)


def test_star_assortativity():
    report = graph_properties(_graph(5, [(0, 1), (0, 2), (0, 3), (0, 4)]), NO_NULLS)
    assert report.assortativity == pytest.approx(-1.0, abs=1e-12)


def test_regular_graph_assortativity_is_undefined():
    report = graph_properties(nx.cycle_graph(6), NO_NULLS)
    assert np.isnan(report.assortativity)
    assert 'assortativity' in report.undefined
    assert 'small_worldness' in report.undefined
    assert report.to_dict()['assortativity'] is None


def test_empty_subgraph_is_flagged():
    edge_map = EdgeImportanceMap(np.zeros((4, 4)), MapKind.LM_WEIGHT)
    with pytest.warns(ConnectomeWarning, match='empty edge set'):
        report = subgraph_metrics(edge_map, 50, NO_NULLS)
    assert report.n_edges == 0
    assert set(report.undefined) == {'clustering_coefficient', 'modularity', 'avg_shortest_path',
                                     'global_efficiency', 'small_worldness', 'assortativity'}


def test_subgraph_uses_top_fraction_edges():
    edge_map = _attention_map([0.9, 0.1, 0.8, 0.2, 0.3, 1.0], 4)
    report = subgraph_metrics(edge_map, 50, NO_NULLS)
    # top three: (2, 3), (0, 1), (0, 3)
    assert report.n_edges == 3
    assert report.n_nodes == 4
    assert report.clustering_coefficient == 0.0


def _oracle(n, edges):
    adj = np.zeros((n, n), dtype=int)
    for i, j in edges:
        adj[i, j] = adj[j, i] = 1
    deg = adj.sum(axis=1)
    clustering = []
    for i in range(n):
        neighbours = np.flatnonzero(adj[i])
        k = len(neighbours)
        triangles = sum(adj[a, b] for a, b in itertools.combinations(neighbours, 2))
        clustering.append(0.0 if k < 2 else 2.0 * triangles / (k * (k - 1)))
    dist = np.full((n, n), np.inf)
    dist[adj == 1] = 1
    np.fill_diagonal(dist, 0)
    for k in range(n):
        dist = np.minimum(dist, dist[:, [k]] + dist[[k], :])
    upper = dist[np.triu_indices(n, k=1)]
    finite = upper[np.isfinite(upper)]
    x = np.array([deg[i] for i, j in edges] + [deg[j] for i, j in edges], dtype=float)
    y = np.array([deg[j] for i, j in edges] + [deg[i] for i, j in edges], dtype=float)
    assortativity = np.corrcoef(x, y)[0, 1] if x.std() > 0 else np.nan
    return {'clustering': np.mean(clustering), 'path': finite.mean(),
            'efficiency': np.where(np.isfinite(upper), 1.0 / np.maximum(upper, 1), 0.0).mean(),
            'assortativity': assortativity}


def _direct_modularity(n, edges, partition):
    m = len(edges)
    deg = np.bincount(np.ravel(edges), minlength=n)
    q = 0.0
    for community in partition:
        members = set(community)
        inside = sum(1 for i, j in edges if i in members and j in members)
        q += inside / m - (deg[list(members)].sum() / (2.0 * m)) ** 2
    return q


def _connected_graphs():
    for n in range(2, 6):
        pairs = list(itertools.combinations(range(n), 2))
        for mask in range(1, 2 ** len(pairs)):
            edges = [p for b, p in enumerate(pairs) if mask >> b & 1]
            if nx.is_connected(_graph(n, edges)):
                yield n, edges
    rng = np.random.default_rng(6)
    pairs = list(itertools.combinations(range(6), 2))
    produced = 0
    while produced < 200:
        edges = [p for p in pairs if rng.uniform() < 0.45]
        if edges and nx.is_connected(_graph(6, edges)):
            produced += 1
            yield 6, edges


def test_graph_metrics_match_brute_force():
    checked = 0
    for n, edges in _connected_graphs():
        report = graph_properties(_graph(n, edges), NO_NULLS)
        oracle = _oracle(n, edges)
        assert report.clustering_coefficient == pytest.approx(oracle['clustering'], abs=1e-12)
        assert report.avg_shortest_path == pytest.approx(oracle['path'], abs=1e-12)
        assert report.global_efficiency == pytest.approx(oracle['efficiency'], abs=1e-12)
        if np.isnan(oracle['assortativity']):
            assert np.isnan(report.assortativity)
        else:
            assert report.assortativity == pytest.approx(oracle['assortativity'], abs=1e-9)
        assert report.modularity == pytest.approx(_direct_modularity(n, edges, report.partition), abs=1e-9)
        assert -0.5 <= report.modularity <= 1
        checked += 1
    assert checked > 700


def test_random_graph_small_worldness_is_near_one():
    graph = nx.gnm_random_graph(60, 300, seed=1)
    report = graph_properties(graph, NullConfig(n_nulls=10, seed=0))
    assert abs(report.small_worldness - 1.0) < 0.2
    assert report.null_seed == 0


def test_small_worldness_is_seeded():
    graph = nx.connected_watts_strogatz_graph(30, 4, 0.1, seed=2)
    a = graph_properties(graph, NullConfig(n_nulls=3, seed=4))
    b = graph_properties(graph, NullConfig(n_nulls=3, seed=4, n_jobs=2))
    assert a.small_worldness == b.small_worldness
    assert a.small_worldness > 1


def test_single_system_atlas_block_is_global_mean():
    edge_map = _attention_map([0.2, 0.4, 0.6, 0.8, 1.0, 0.5], 4)
    blocks = map_rois_to_systems(SystemAtlas(('DMN',) * 4), edge_map).blocks
    dmn = SYSTEMS.index('DMN')
    assert blocks[dmn, dmn] == pytest.approx(3.5 / 6, abs=1e-12)
    assert np.count_nonzero(blocks) == 1


def test_toy_atlas_blocks_match_hand_means():
    edge_map = _attention_map([0.2, 0.4, 0.6, 0.8, 1.0, 0.5], 4)
    result = map_rois_to_systems(SystemAtlas(('SM', 'SM', 'DMN', 'DMN')), edge_map)
    sm, dmn = SYSTEMS.index('SM'), SYSTEMS.index('DMN')
    assert result.blocks[sm, sm] == pytest.approx(0.2, abs=1e-12)
    assert result.blocks[dmn, dmn] == pytest.approx(0.5, abs=1e-12)
    assert result.blocks[sm, dmn] == pytest.approx(0.7, abs=1e-12)
    np.testing.assert_array_equal(result.blocks, result.blocks.T)
    assert result.groups['SM'] == [0, 1]


def test_atlas_must_cover_every_roi():
    with pytest.raises(ValueError, match='every ROI'):
        map_rois_to_systems(SystemAtlas(('SM', 'DMN')), _attention_map([0.1, 0.2, 0.3], 3))


def test_load_atlas(tmp_path):
    path = tmp_path / 'atlas.csv'
    path.write_text('roi_index,roi_label,system\n1,PCC,DMN\n0,M1,SM\n')
    atlas = load_atlas(str(path))
    assert atlas.systems == ('SM', 'DMN')
    assert atlas.roi_labels == ('M1', 'PCC')
    path.write_text('roi_index,roi_label,system\n0,M1,Motor\n')
    with pytest.raises(ValueError, match='unknown neural systems'):
        load_atlas(str(path))


def test_toy_atlas_file_loads():
    atlas = load_atlas(os.path.join(os.path.dirname(__file__), '..', '..', 'data', 'toy_atlas.csv'))
    assert len(atlas) == 8
    assert set(atlas.systems) == set(SYSTEMS)


def test_chord_counts():
    atlas = SystemAtlas(('SM', 'DMN', 'SM', 'Vis'))
    edges = [(0, 1, 0.9), (1, 2, 0.8), (0, 2, 0.5), (2, 3, 0.1)]
    assert chord_counts(edges, atlas) == [('SM', 'SM', 1), ('SM', 'DMN', 2), ('SM', 'Vis', 1)]


def test_interpretation_bundle(tmp_path, trained_dual):
    model, test_a = trained_dual
    path = save_checkpoint(model, str(tmp_path / 'dual.h5'))
    bundle = interpret_model(load_checkpoint(path), test_a, top_fraction=10, subgraph_fraction=50,
                             null_config=NullConfig(n_nulls=2))
    written = write_bundle(bundle, str(tmp_path / 'interpret'), {'config_hash': 'abc', 'master_seed': 7})
    names = {os.path.basename(p) for p in written}
    for kind in ('attention', 'lm_weight'):
        assert {'edge_map_%s.csv' % kind, 'top_edges_%s.csv' % kind, 'graph_properties_%s.json' % kind,
                'system_blocks_%s.csv' % kind, 'chord_%s.csv' % kind} <= names
        values = np.loadtxt(str(tmp_path / 'interpret' / ('edge_map_%s.csv' % kind)), delimiter=',')
        np.testing.assert_array_equal(values, values.T)
        assert not np.any(np.diag(values))
        low = 0.0 if kind == 'attention' else -1.0
        assert values.min() >= low and values.max() <= 1.0
        blocks = bundle.blocks[kind].blocks
        assert blocks.shape == (6, 6)
        np.testing.assert_allclose(blocks, blocks.T, atol=1e-12)
        with open(str(tmp_path / 'interpret' / ('graph_properties_%s.json' % kind))) as f:
            props = json.load(f)
        assert props['master_seed'] == 7 and props['config_hash'] == 'abc'
    assert {'node_importance_attention_rowsum.csv', 'node_importance_positive_weights.csv',
            'node_importance_negative_weights.csv', 'metadata.json'} <= names
    with open(str(tmp_path / 'interpret' / 'top_edges_attention.csv')) as f:
        assert f.readline().startswith('# config_hash=abc master_seed=7')
