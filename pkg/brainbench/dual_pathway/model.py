"""LM pathway on u fused with a GAT pathway over BOLD-encoded node features.

The fused head sees z = [h_graph; u] where h_graph is the concatenation of
the final GAT node embeddings (n * d' values). Head rows [0, n*d') weight the
graph pathway, rows [n*d', n*d' + n(n-1)/2) are the linear model on u.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import tensorflow as tf

from brainbench.connectome import (
    SignMode,
    TimeSeriesMatrix,
    n_pairs,
    pearson_connectivity,
    threshold_batch,
    threshold_top_k,
    vectorize_upper,
)
from brainbench.data_io import Task, zscore_rows
from brainbench.dual_pathway.encoder import BoldEncoder, EncoderSpec
from brainbench.graph_models.gnn import GNNSpec, make_conv
from brainbench.graph_models.layers import DTYPE, initializer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DualSpec:
    encoder: EncoderSpec = field(default_factory=EncoderSpec)
    gat: GNNSpec = field(default_factory=lambda: GNNSpec('gat'))
    seed: int = 0

    def __post_init__(self):
        if self.gat.architecture != 'gat':
            raise ValueError('graph pathway must be a GAT, got %r' % (self.gat.architecture,))
        if self.gat.sign_mode is not SignMode.POSITIVE_ONLY:
            raise ValueError('graph pathway keeps positive correlations only')

    @property
    def density(self):
        return self.gat.k_percent

    def to_dict(self):
        return {'encoder': self.encoder.to_dict(), 'gat': self.gat.to_dict(), 'seed': self.seed}

    @classmethod
    def from_dict(cls, raw):
        return cls(EncoderSpec(**raw['encoder']), GNNSpec(**raw['gat']), int(raw['seed']))


class DualPathwayModel(tf.keras.Model):
    """Outputs raw head values: 2 logits (classification) or 1 scalar."""

    def __init__(self, spec, n_roi, series_length, task, **kwargs):
        super(DualPathwayModel, self).__init__(dtype=DTYPE, **kwargs)
        self.spec = spec
        self.n_roi = n_roi
        self.series_length = series_length
        self.task = Task(task)
        self.encoder = BoldEncoder(spec.encoder)
        self.encoder.check_length(series_length)
        self.convs = []
        dim = spec.encoder.out_dim
        for i in range(spec.gat.n_layers):
            conv = make_conv(spec.gat, i, dim)
            dim = conv.out_dim
            self.convs.append(conv)
        self.d_prime = dim
        self.d_double_prime = n_roi * dim
        self.n_pairs = n_pairs(n_roi)
        fused = self.d_double_prime + self.n_pairs
        self.head_kernel = self.add_weight(name='head_kernel', shape=(fused, self.task.n_outputs),
                                           initializer=initializer(spec.seed * 1000 + 200), dtype=DTYPE)
        self.head_bias = self.add_weight(name='head_bias', shape=(self.task.n_outputs,),
                                         initializer='zeros', dtype=DTYPE)

    @property
    def u_rows(self):
        return slice(self.d_double_prime, self.d_double_prime + self.n_pairs)

    @property
    def graph_rows(self):
        return slice(0, self.d_double_prime)

    def node_embeddings(self, bold, adjacency):
        h = self.encoder(bold)
        for conv in self.convs:
            h = tf.nn.relu(conv(h, adjacency))
        return h

    def first_layer_attention(self, bold, adjacency):
        """(batch, heads, n, n) attention of the first GAT layer."""
        _, alpha = self.convs[0].attention(self.encoder(bold), adjacency)
        return alpha

    def call(self, inputs, training=False):
        adjacency, bold, u = inputs
        h = self.node_embeddings(bold, adjacency)
        h_graph = tf.reshape(h, [-1, self.d_double_prime])
        z = tf.concat([h_graph, tf.cast(u, DTYPE)], axis=-1)
        return tf.matmul(z, self.head_kernel) + self.head_bias

    def feed(self, arrays):
        """(positive-only adjacency, z-scored BOLD, u) per subject."""
        adjacency = threshold_batch(arrays.connectivity, self.spec.density, SignMode.POSITIVE_ONLY)
        return adjacency, arrays.bold, arrays.vectors


def build_dual_model(spec, n_roi, series_length, task):
    """DualPathwayModel with all weights created."""
    model = DualPathwayModel(spec, n_roi, series_length, task)
    dummy = (np.zeros((1, n_roi, n_roi)), np.zeros((1, n_roi, series_length)),
             np.zeros((1, n_pairs(n_roi))))
    model(tuple(tf.constant(a, dtype=DTYPE) for a in dummy))
    logger.debug('dual model: n=%d d\'=%d fused length %d', n_roi, model.d_prime,
                 model.head_kernel.shape[0])
    return model


def _finish(model, outputs):
    if model.task.is_classification:
        return tf.nn.softmax(outputs, axis=-1).numpy()
    return outputs.numpy()


def dual_forward(model, bold, conn=None):
    """Prediction for one subject: class probabilities, or the regression value."""
    if not isinstance(bold, TimeSeriesMatrix):
        bold = TimeSeriesMatrix(bold)
    conn = pearson_connectivity(bold) if conn is None else conn
    values = conn.values if hasattr(conn, 'values') else np.asarray(conn)
    if values.shape[0] != model.n_roi or bold.n_roi != model.n_roi:
        raise ValueError('model expects %d ROIs, got %d' % (model.n_roi, bold.n_roi))
    adjacency = threshold_top_k(values, model.spec.density, SignMode.POSITIVE_ONLY).adjacency
    inputs = (adjacency[None], zscore_rows(bold.values)[None], vectorize_upper(values).values[None])
    out = model(tuple(tf.constant(a, dtype=DTYPE) for a in inputs))
    return _finish(model, out)[0]


def lm_only_forward(model, u):
    """The LM pathway alone: head u-slice and bias applied to u."""
    u = np.atleast_2d(np.asarray(getattr(u, 'values', u), dtype=np.float64))
    if u.shape[1] != model.n_pairs:
        raise ValueError('u has %d entries, model expects %d' % (u.shape[1], model.n_pairs))
    out = tf.matmul(tf.constant(u, dtype=DTYPE), model.head_kernel[model.u_rows]) + model.head_bias
    result = _finish(model, out)
    return result[0] if result.shape[0] == 1 else result
