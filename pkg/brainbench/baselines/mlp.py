"""Non-graph neural baselines: MLP over u and shared per-node MLP over connection profiles."""
from __future__ import annotations

import logging

import numpy as np
import tensorflow as tf

from brainbench.graph_models.layers import DTYPE, dense

logger = logging.getLogger(__name__)


class MLPFlatten(tf.keras.Model):
    """Two affine layers with a rectifier between, on the upper-triangle vector."""

    def __init__(self, n_features, n_outputs, hidden_dim=64, seed=0, **kwargs):
        super(MLPFlatten, self).__init__(dtype=DTYPE, **kwargs)
        self.n_features = n_features
        self.hidden = dense(hidden_dim, seed * 1000, activation='relu')
        self.head = dense(n_outputs, seed * 1000 + 100)

    def call(self, inputs, training=False):
        (u,) = inputs
        if u.shape[-1] != self.n_features:
            raise ValueError('expected %d features, got %d' % (self.n_features, u.shape[-1]))
        return self.head(self.hidden(u))

    def feed(self, arrays):
        return (arrays.vectors,)


class MLPNode(tf.keras.Model):
    """Shared per-node affine + rectifier layers, node concatenation, affine head."""

    def __init__(self, n_roi, in_dim, n_outputs, hidden_dim=64, n_layers=1, seed=0, **kwargs):
        super(MLPNode, self).__init__(dtype=DTYPE, **kwargs)
        if n_layers < 1:
            raise ValueError('n_layers must be >= 1, got %r' % (n_layers,))
        self.n_roi = n_roi
        self.in_dim = in_dim
        self.node_layers = [dense(hidden_dim, seed * 1000 + i, activation='relu') for i in range(n_layers)]
        self.head = dense(n_outputs, seed * 1000 + 100)

    def call(self, inputs, training=False):
        (x,) = inputs
        if tuple(x.shape[1:]) != (self.n_roi, self.in_dim):
            raise ValueError('expected node features (%d, %d), got %s'
                             % (self.n_roi, self.in_dim, tuple(x.shape[1:])))
        h = x
        for layer in self.node_layers:
            h = layer(h)
        return self.head(tf.reshape(h, [tf.shape(h)[0], h.shape[1] * h.shape[2]]))

    def feed(self, arrays):
        return (arrays.connectivity,)


def build_mlp(kind, n_roi, n_outputs, hidden_dim=64, n_layers=1, seed=0, in_dim=None):
    """Built MLP baseline of `kind` (mlp_flatten or mlp_node)."""
    if kind == 'mlp_flatten':
        n_features = n_roi * (n_roi - 1) // 2
        model = MLPFlatten(n_features, n_outputs, hidden_dim=hidden_dim, seed=seed)
        dummy = (np.zeros((1, n_features)),)
    elif kind == 'mlp_node':
        in_dim = n_roi if in_dim is None else in_dim
        model = MLPNode(n_roi, in_dim, n_outputs, hidden_dim=hidden_dim, n_layers=n_layers, seed=seed)
        dummy = (np.zeros((1, n_roi, in_dim)),)
    else:
        raise ValueError('unknown MLP kind %r' % (kind,))
    model(tuple(tf.constant(a, dtype=DTYPE) for a in dummy))
    return model


def mlp_forward(spec, inputs, parameters=None):
    """Raw output (1 value or 2 logits) of an MLP baseline for one sample.

    `inputs` is a FeatureVector for mlp_flatten and a NodeFeatureMatrix for
    mlp_node; `parameters` follow `model.get_weights()` order.
    """
    hp = spec.hyperparameters
    values = np.asarray(inputs.values, dtype=np.float64)
    if spec.kind == 'mlp_flatten':
        if values.ndim != 1:
            raise ValueError('mlp_flatten takes a feature vector, got shape %s' % (values.shape,))
        n_roi = inputs.n
        model = build_mlp(spec.kind, n_roi, spec.task.n_outputs, hidden_dim=hp.get('hidden_dim', 64),
                          seed=spec.seed)
    else:
        if values.ndim != 2:
            raise ValueError('mlp_node takes a node feature matrix, got shape %s' % (values.shape,))
        model = build_mlp(spec.kind, values.shape[0], spec.task.n_outputs,
                          hidden_dim=hp.get('hidden_dim', 64), n_layers=hp.get('n_layers', 1),
                          seed=spec.seed, in_dim=values.shape[1])
    if parameters is not None:
        model.set_weights(parameters)
    return model((tf.constant(values[None], dtype=DTYPE),), training=False).numpy()[0]
