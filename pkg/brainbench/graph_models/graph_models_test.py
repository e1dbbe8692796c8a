import dataclasses

import numpy as np
import pytest
import tensorflow as tf

from brainbench.baselines import build_mlp
from brainbench.bench.metrics import evaluate
from brainbench.connectome import BrainGraph, SignMode, connection_profiles, threshold_top_k
from brainbench.data_io import ConnectomeArrays, SplitSpec, split_indices
from brainbench.graph_models import (
    DEFAULT_DENSITY,
    GNNSpec,
    SweepResult,
    TrainConfig,
    TrainingDiverged,
    build_graph_net,
    density_sweep,
    fit_model,
    gnn_forward,
    residual_augment,
    train,
)
from brainbench.graph_models.layers import GATConv, GINConv

ARCHS = [GNNSpec('gcn'), GNNSpec('gat', heads=2), GNNSpec('gin', epsilon=0.2),
         GNNSpec('sage', aggregator='mean'), GNNSpec('sage', aggregator='max')]


def _t(a):
    return tf.constant(a, dtype='float64')


def _inputs(conn, spec):
    n = conn.shape[-1]
    adjacency = threshold_top_k(conn, spec.k_percent, spec.sign_mode).adjacency
    rows, cols = np.triu_indices(n, k=1)
    return _t(adjacency[None]), _t(conn[None]), _t(conn[rows, cols][None])


@pytest.fixture(scope='module')
def regression_arrays(small_regression_dataset):
    return ConnectomeArrays.from_dataset(small_regression_dataset)


@pytest.mark.parametrize('instance', range(20))
def test_empty_graph_gcn_equals_mlp_node(random_conn, instance):
    n = 4 if instance % 2 == 0 else 50
    conn = random_conn(n=n, seed=instance).values
    spec = GNNSpec('gcn', n_layers=2, hidden_dim=6, density=0.0, seed=instance)
    gcn = build_graph_net(spec, n, 1)
    mlp = build_mlp('mlp_node', n, 1, hidden_dim=6, n_layers=2, seed=instance + 1)
    for conv, layer in zip(gcn.convs, mlp.node_layers):
        layer.kernel.assign(conv.kernel)
        layer.bias.assign(conv.bias)
    mlp.head.kernel.assign(gcn.head.kernel)
    mlp.head.bias.assign(gcn.head.bias)
    inputs = _inputs(conn, spec)
    assert not np.any(inputs[0].numpy())
    np.testing.assert_allclose(gcn(inputs).numpy(), mlp((inputs[1],)).numpy(), atol=1e-5)


@pytest.mark.parametrize('spec', ARCHS, ids=lambda s: '%s-%s' % (s.architecture, s.aggregator))
def test_identical_nodes_get_identical_embeddings(spec):
    model = build_graph_net(spec.replace(hidden_dim=4), 2, 1, in_dim=3)
    x = _t(np.array([[[0.3, -0.2, 0.9], [0.3, -0.2, 0.9]]]))
    adjacency = _t(np.array([[[0.0, 0.7], [0.7, 0.0]]]))
    for h in model.node_embeddings(x, adjacency):
        np.testing.assert_allclose(h.numpy()[0, 0], h.numpy()[0, 1], atol=1e-12)


def test_gin_aggregation_matches_dense_oracle(random_conn):
    conn = random_conn(n=5, seed=2).values
    adjacency = threshold_top_k(conn, 40.0).adjacency
    x = np.random.default_rng(2).standard_normal((5, 3))
    conv = GINConv(3, 4, seed=0, epsilon=0.0)
    expected = ((adjacency != 0).astype(float) + np.eye(5)) @ x
    np.testing.assert_allclose(conv.aggregate(_t(x[None]), _t(adjacency[None])).numpy()[0], expected,
                               rtol=0, atol=1e-12)


@pytest.mark.parametrize('spec', ARCHS, ids=lambda s: '%s-%s' % (s.architecture, s.aggregator))
def test_node_permutation_equivariance(random_conn, spec):
    n = 7
    conn = random_conn(n=n, seed=5).values
    spec = spec.replace(readout='mean', density=30.0, hidden_dim=5)
    model = build_graph_net(spec, n, 2)
    adjacency, x, u = _inputs(conn, spec)
    perm = np.random.default_rng(1).permutation(n)
    adj_p = _t(adjacency.numpy()[:, perm][:, :, perm])
    x_p = _t(x.numpy()[:, perm])

    emb = model.node_embeddings(x, adjacency)[-1].numpy()
    emb_p = model.node_embeddings(x_p, adj_p)[-1].numpy()
    np.testing.assert_allclose(emb_p, emb[:, perm], atol=1e-10)
    np.testing.assert_allclose(model((adj_p, x_p, u)).numpy(), model((adjacency, x, u)).numpy(),
                               atol=1e-5)


def test_gat_attention_rows_sum_to_one(random_conn):
    conn = random_conn(n=6, seed=9).values
    adjacency = threshold_top_k(conn, 30.0).adjacency
    conv = GATConv(6, 4, heads=3, seed=1)
    _, alpha = conv.attention(_t(conn[None]), _t(adjacency[None]))
    alpha = alpha.numpy()[0]
    allowed = (adjacency != 0) | np.eye(6, dtype=bool)
    assert np.all(alpha >= 0)
    np.testing.assert_allclose(alpha.sum(axis=-1), 1.0, atol=1e-6)
    assert np.all(alpha[:, ~allowed] < 1e-12)


@pytest.mark.parametrize('spec', ARCHS + [GNNSpec('gcn', residual=True, layer_concat=True),
                                          GNNSpec('gcn', layer_concat=True, readout='mean')],
                         ids=lambda s: '%s-%s-%s' % (s.family, s.aggregator, s.readout))
def test_gradient_check(random_conn, gradient_check, spec):
    n = 6
    spec = spec.replace(n_layers=2, hidden_dim=3, density=40.0, seed=4)
    model = build_graph_net(spec, n, 2)
    batch = [_inputs(random_conn(n=n, seed=s).values, spec) for s in (1, 2)]
    inputs = tuple(tf.concat(parts, axis=0) for parts in zip(*batch))
    labels = tf.constant([0, 1])

    def loss(out):
        return tf.reduce_mean(tf.nn.sparse_softmax_cross_entropy_with_logits(labels, out))

    assert gradient_check(model, inputs, loss) < 1e-4


def test_residual_augment_lengths():
    pooled = [np.ones((2, 8)), np.ones((2, 8))]
    u = np.zeros((2, 10))
    assert residual_augment(pooled, u).shape == (2, 26)
    assert residual_augment(pooled).shape == (2, 16)


def test_zero_hidden_path_leaves_only_u(random_conn):
    n = 5
    spec = GNNSpec('gcn', hidden_dim=4, residual=True, layer_concat=True, density=50.0)
    model = build_graph_net(spec, n, 1)
    for conv in model.convs:
        for w in conv.weights:
            w.assign(tf.zeros_like(w))
    a = _inputs(random_conn(n=n, seed=1).values, spec)
    b = _inputs(random_conn(n=n, seed=2).values, spec)
    # same u, different graph and node features
    np.testing.assert_allclose(model((b[0], b[1], a[2])).numpy(), model(a).numpy(), atol=1e-12)
    with tf.GradientTape() as tape:
        out = model(a)
    grads = tape.gradient(out, model.convs[-1].trainable_variables)
    assert all(g is None or not np.any(g.numpy()) for g in grads)


def test_gnn_forward_single_graph(random_conn):
    conn = random_conn(n=6, seed=3)
    graph = threshold_top_k(conn, 20.0).with_features(connection_profiles(conn))
    out = gnn_forward(GNNSpec('gat', seed=1), None, graph, 2)
    assert out.shape == (2,)
    with pytest.raises(ValueError, match='node features'):
        gnn_forward(GNNSpec('gcn'), None, threshold_top_k(conn, 20.0), 2)


def test_default_densities():
    assert GNNSpec('gcn').k_percent == 5.0
    assert GNNSpec('sage', layer_concat=True).k_percent == 5.0
    assert GNNSpec('gcn', sign_mode=SignMode.SIGNED).k_percent == 100.0
    assert GNNSpec('gin', density=20).k_percent == 20
    assert DEFAULT_DENSITY['braingnn'] == 10.0


def test_spec_validation():
    for bad in ({'n_layers': 0}, {'hidden_dim': 0}, {'heads': 0}, {'architecture': 'gru'},
                {'readout': 'sum'}, {'density': 120.0}):
        with pytest.raises(ValueError):
            GNNSpec(**bad)


def _split(arrays, seed=0):
    return split_indices(len(arrays), SplitSpec(seed=seed)).arrays(arrays)


def test_training_history_shape(regression_arrays):
    train_a, val_a, _ = _split(regression_arrays)
    config = TrainConfig(epochs=6, batch_size=8, seed=1)
    parameters, history = train(GNNSpec('gat', hidden_dim=4), train_a, val_a, config)
    assert len(history.train_loss) == len(history.val_metric) == 6
    assert 0 <= history.best_epoch < 6
    assert history.best_val_metric == max(history.val_metric)
    assert history.val_metric.index(history.best_val_metric) == history.best_epoch
    assert isinstance(parameters, list)


def test_training_is_deterministic(regression_arrays):
    train_a, val_a, _ = _split(regression_arrays)
    config = TrainConfig(epochs=3, batch_size=8, seed=7)
    spec = GNNSpec('sage', hidden_dim=4, seed=3)
    p1, h1 = train(spec, train_a, val_a, config)
    p2, h2 = train(spec, train_a, val_a, config)
    assert h1.best_val_metric == h2.best_val_metric
    for a, b in zip(p1, p2):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize('extra', [{}, {'residual': True, 'layer_concat': True}])
def test_zero_learning_rate_keeps_initialization(regression_arrays, extra):
    train_a, val_a, _ = _split(regression_arrays)
    spec = GNNSpec('gcn', hidden_dim=4, seed=2, **extra)
    model = build_graph_net(spec, regression_arrays.n_roi, 1)
    initial = model.get_weights()
    untrained = build_graph_net(spec, regression_arrays.n_roi, 1)
    baseline = evaluate(untrained(tuple(_t(a) for a in untrained.feed(val_a))).numpy()[:, 0],
                        val_a.targets, val_a.task)

    _, history = fit_model(model, train_a, val_a, TrainConfig(epochs=2, learning_rate=0.0))
    for a, b in zip(initial, model.get_weights()):
        np.testing.assert_array_equal(a, b)
    assert history.val_metric[0] == pytest.approx(baseline, abs=1e-12)


def test_divergence_aborts_with_history(regression_arrays):
    blown = dataclasses.replace(regression_arrays, targets=regression_arrays.targets * 1e200)
    train_a, val_a, _ = _split(blown)
    with pytest.raises(TrainingDiverged) as info:
        train(GNNSpec('gcn', hidden_dim=4), train_a, val_a, TrainConfig(epochs=2))
    assert len(info.value.history) == 0


def test_sweep_at_zero_density_is_the_aggregation_free_model(small_regression_dataset,
                                                              regression_arrays):
    spec = GNNSpec('gcn', hidden_dim=4)
    config = TrainConfig(epochs=2, batch_size=8)
    result = density_sweep(spec, small_regression_dataset, [0], runs=1, config=config,
                           arrays=regression_arrays, master_seed=5)

    train_a, val_a, test_a = _split(regression_arrays, seed=5 + 1000)
    model = build_graph_net(spec.replace(density=0.0, seed=5 + 2000), regression_arrays.n_roi, 1)
    trainer, _ = fit_model(model, train_a, val_a, config.replace(seed=5 + 2000))
    expected = evaluate(trainer.predict(model.feed(test_a)), test_a.targets, test_a.task)
    assert result.summary(0)['runs'] == [expected]
    assert result.summary(0)['std'] == 0.0


def test_sweep_structure_and_json(small_regression_dataset, regression_arrays):
    result = density_sweep(GNNSpec('gin', hidden_dim=3), small_regression_dataset, [0, 5, 20, 100],
                           runs=2, config=TrainConfig(epochs=1, batch_size=16),
                           arrays=regression_arrays)
    assert len(result.rows()) == 4
    for k in (0, 5, 20, 100):
        summary = result.summary(k)
        assert len(summary['runs']) == 2
        assert summary['mean'] == pytest.approx(np.mean(summary['runs']), abs=1e-12)
        assert summary['std'] == pytest.approx(np.std(summary['runs']), abs=1e-12)
    again = SweepResult.from_json(result.to_json())
    assert again.per_k == result.per_k
    assert again.k_values == result.k_values


def test_sweep_rejects_empty_inputs(small_regression_dataset):
    with pytest.raises(ValueError):
        density_sweep(GNNSpec(), small_regression_dataset, [], runs=1)
    with pytest.raises(ValueError):
        density_sweep(GNNSpec(), small_regression_dataset, [5], runs=0)


def test_brain_graph_features_flow_into_signed_gcn(random_conn):
    conn = random_conn(n=6, seed=4)
    graph = threshold_top_k(conn, 100.0, SignMode.SIGNED).with_features(connection_profiles(conn))
    assert isinstance(graph, BrainGraph)
    out = gnn_forward(GNNSpec('gcn', sign_mode=SignMode.SIGNED), None, graph, 1)
    assert np.all(np.isfinite(out))
