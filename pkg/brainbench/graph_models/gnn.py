"""GCN / GAT / GIN / GraphSAGE graph-level predictors over connection profiles."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np
import tensorflow as tf

from brainbench.connectome import SignMode, threshold_batch
from brainbench.graph_models.layers import DTYPE, GATConv, GCNConv, GINConv, SAGEConv, dense

logger = logging.getLogger(__name__)

ARCHITECTURES = ('gcn', 'gat', 'gin', 'sage')
READOUTS = ('concat', 'mean')

# default graph density (top K%) per model family
DEFAULT_DENSITY = {
    'gcn': 5.0,
    'gat': 5.0,
    'gin': 5.0,
    'sage': 5.0,
    'residual': 5.0,
    'braingnn': 10.0,
    'signed': 100.0,
}


@dataclass(frozen=True)
class GNNSpec:
    architecture: str = 'gcn'
    n_layers: int = 2
    hidden_dim: int = 32
    heads: int = 2
    epsilon: float = 0.0
    aggregator: str = 'mean'
    readout: str = 'concat'
    residual: bool = False
    layer_concat: bool = False
    sign_mode: SignMode = SignMode.POSITIVE_ONLY
    density: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError('unknown architecture %r (expected one of %s)'
                             % (self.architecture, ', '.join(ARCHITECTURES)))
        if self.n_layers < 1 or self.hidden_dim < 1 or self.heads < 1:
            raise ValueError('n_layers, hidden_dim and heads must all be >= 1')
        if self.readout not in READOUTS:
            raise ValueError('unknown readout %r' % (self.readout,))
        if self.aggregator not in ('mean', 'max'):
            raise ValueError('unknown aggregator %r' % (self.aggregator,))
        object.__setattr__(self, 'sign_mode', SignMode(self.sign_mode))
        if self.density is not None and not 0 <= self.density <= 100:
            raise ValueError('density must lie in [0, 100], got %r' % (self.density,))

    @property
    def family(self):
        if self.sign_mode is SignMode.SIGNED:
            return 'signed'
        if self.residual or self.layer_concat:
            return 'residual'
        return self.architecture

    @property
    def augmented(self):
        return self.residual or self.layer_concat

    @property
    def k_percent(self):
        return DEFAULT_DENSITY[self.family] if self.density is None else self.density

    def replace(self, **changes):
        values = asdict(self)
        values.update(changes)
        return GNNSpec(**values)

    def to_dict(self):
        values = asdict(self)
        values['sign_mode'] = self.sign_mode.value
        return values

    @classmethod
    def field_names(cls):
        return {f.name for f in fields(cls)}


def make_conv(spec, index, in_dim):
    seed = spec.seed * 1000 + index
    last = index == spec.n_layers - 1
    if spec.architecture == 'gcn':
        return GCNConv(in_dim, spec.hidden_dim, seed)
    if spec.architecture == 'gat':
        return GATConv(in_dim, spec.hidden_dim, spec.heads, seed, concat=not last)
    if spec.architecture == 'gin':
        return GINConv(in_dim, spec.hidden_dim, seed, epsilon=spec.epsilon)
    return SAGEConv(in_dim, spec.hidden_dim, seed, aggregator=spec.aggregator)


def residual_augment(pooled_embeddings, u=None):
    """Concatenates per-layer pooled embeddings, then u when given.

    u=None is the "w/o Res" variant. The model applies batch normalization
    and its MLP head to the result.
    """
    parts = list(pooled_embeddings)
    if u is not None:
        parts.append(tf.convert_to_tensor(u, dtype=DTYPE))
    return tf.concat(parts, axis=-1)


class GraphNet(tf.keras.Model):
    """Stack of message-aggregation layers, readout and prediction head.

    Inputs are (adjacency, node_features, u). u is only read by the
    residual variant.
    """

    def __init__(self, spec, n_roi, in_dim, n_outputs, **kwargs):
        super(GraphNet, self).__init__(dtype=DTYPE, **kwargs)
        self.spec = spec
        self.n_roi = n_roi
        self.n_outputs = n_outputs
        self.convs = []
        dim = in_dim
        for i in range(spec.n_layers):
            conv = make_conv(spec, i, dim)
            dim = conv.out_dim if isinstance(conv, GATConv) else conv.units
            self.convs.append(conv)

        if spec.augmented:
            self.norm = tf.keras.layers.BatchNormalization(dtype=DTYPE)
            self.mlp_hidden = dense(spec.hidden_dim, spec.seed * 1000 + 101, activation='relu')
        self.head = dense(n_outputs, spec.seed * 1000 + 100)

    def node_embeddings(self, features, adjacency):
        hidden = []
        h = features
        for conv in self.convs:
            h = tf.nn.relu(conv(h, adjacency))
            hidden.append(h)
        return hidden

    def readout(self, h):
        if self.spec.readout == 'mean':
            return tf.reduce_mean(h, axis=1)
        return tf.reshape(h, [tf.shape(h)[0], h.shape[1] * h.shape[2]])

    def call(self, inputs, training=False):
        adjacency, features, u = inputs
        hidden = self.node_embeddings(features, adjacency)
        if not self.spec.augmented:
            return self.head(self.readout(hidden[-1]))
        z = residual_augment([self.readout(h) for h in hidden], u if self.spec.residual else None)
        return self.head(self.mlp_hidden(self.norm(z, training=training)))

    def feed(self, arrays):
        """(adjacency, connection profiles, u) for every subject in `arrays`."""
        adjacency = threshold_batch(arrays.connectivity, self.spec.k_percent, self.spec.sign_mode)
        return adjacency, arrays.connectivity, arrays.vectors


def build_graph_net(spec, n_roi, n_outputs, in_dim=None):
    """GraphNet with all weights created (one dummy forward pass)."""
    in_dim = n_roi if in_dim is None else in_dim
    model = GraphNet(spec, n_roi, in_dim, n_outputs)
    dummy = (np.zeros((1, n_roi, n_roi)), np.zeros((1, n_roi, in_dim)),
             np.zeros((1, n_roi * (n_roi - 1) // 2)))
    model(tuple(tf.constant(a, dtype=DTYPE) for a in dummy), training=False)
    return model


def gnn_forward(spec, parameters, graph, n_outputs, u=None):
    """Prediction of a GraphNet with `parameters` on a single BrainGraph.

    Args:
        spec (GNNSpec): architecture
        parameters (list or None): arrays in `model.get_weights()` order;
            None keeps the seeded initialization
        graph (BrainGraph): adjacency plus node features
        n_outputs (int): 1 for regression, 2 logits for classification
        u (array or None): upper-triangle vector for the residual variant

    Returns:
        np.ndarray: output vector of length n_outputs
    """
    if graph.node_features is None:
        raise ValueError('graph carries no node features')
    x = graph.node_features.values
    n = graph.adjacency.shape[0]
    if x.shape[0] != n:
        raise ValueError('node features have %d rows for a %d-node graph' % (x.shape[0], n))
    model = build_graph_net(spec, n, n_outputs, in_dim=x.shape[1])
    if parameters is not None:
        model.set_weights(parameters)
    if u is None:
        u = np.zeros(n * (n - 1) // 2)
    inputs = (graph.adjacency[None], x[None], np.asarray(u, dtype=np.float64)[None])
    out = model(tuple(tf.constant(a, dtype=DTYPE) for a in inputs), training=False).numpy()[0]
    if not np.all(np.isfinite(out)):
        raise FloatingPointError('non-finite output from %s forward pass' % spec.architecture)
    return out
