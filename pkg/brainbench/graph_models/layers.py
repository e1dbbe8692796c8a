"""Dense-batch message-aggregation layers.

Every layer takes node features x of shape (batch, n, d) and an adjacency
stack of shape (batch, n, n) with zero diagonal. Self-loops are added inside
GCN normalization and GAT attention; GIN and GraphSAGE carry the node itself
through explicit self terms. With an all-zero adjacency each layer is a
per-node transformation.
"""
from __future__ import annotations

import tensorflow as tf

DTYPE = 'float64'
NEG_INF = -1e9


def initializer(seed):
    return tf.keras.initializers.LecunUniform(seed=int(seed))


def dense(units, seed, activation=None, name=None):
    return tf.keras.layers.Dense(units, activation=activation, kernel_initializer=initializer(seed),
                                 bias_initializer='zeros', dtype=DTYPE, name=name)


def binarize(adjacency):
    return tf.cast(tf.not_equal(adjacency, 0), adjacency.dtype)


def with_self_loops(adjacency):
    n = tf.shape(adjacency)[-1]
    return adjacency + tf.eye(n, dtype=adjacency.dtype)


class _Conv(tf.keras.layers.Layer):

    def __init__(self, seed, **kwargs):
        super(_Conv, self).__init__(dtype=DTYPE, **kwargs)
        self.seed = int(seed)
        self._n_weights = 0

    def _weight(self, name, shape, zeros=False):
        self._n_weights += 1
        init = 'zeros' if zeros else initializer(self.seed * 97 + self._n_weights)
        return self.add_weight(name=name, shape=shape, initializer=init, dtype=DTYPE)


class GCNConv(_Conv):
    """D^-1/2 (A + I) D^-1/2 X W + b with correlation-weighted edges."""

    def __init__(self, in_dim, units, seed, **kwargs):
        super(GCNConv, self).__init__(seed, **kwargs)
        self.units = units
        self.kernel = self._weight('kernel', (in_dim, units))
        self.bias = self._weight('bias', (units,), zeros=True)
        self.built = True

    @staticmethod
    def normalized_adjacency(adjacency):
        a_hat = with_self_loops(adjacency)
        # |weights| keep the degree positive for signed graphs
        inv_sqrt = tf.math.rsqrt(tf.reduce_sum(tf.abs(a_hat), axis=-1))
        return a_hat * inv_sqrt[..., :, None] * inv_sqrt[..., None, :]

    def call(self, x, adjacency):
        return tf.matmul(self.normalized_adjacency(adjacency), tf.matmul(x, self.kernel)) + self.bias


class GATConv(_Conv):
    """Multi-head attention over each node's neighbourhood and itself.

    Heads are concatenated, or averaged when `concat` is False (last layer).
    Edges are used by presence only.
    """

    def __init__(self, in_dim, units, heads, seed, concat=True, negative_slope=0.2, **kwargs):
        super(GATConv, self).__init__(seed, **kwargs)
        self.units = units
        self.heads = heads
        self.concat = concat
        self.negative_slope = negative_slope
        self.kernel = self._weight('kernel', (heads, in_dim, units))
        self.attn_src = self._weight('attn_src', (heads, units))
        self.attn_dst = self._weight('attn_dst', (heads, units))
        self.bias = self._weight('bias', (heads * units if concat else units,), zeros=True)
        self.built = True

    @property
    def out_dim(self):
        return self.heads * self.units if self.concat else self.units

    def attention(self, x, adjacency):
        """Returns (projected features (b, heads, n, units), attention (b, heads, n, n)).

        attention[b, k, i, j] is the weight node i gives node j; rows sum to 1.
        """
        h = tf.einsum('bnd,kdu->bknu', x, self.kernel)
        src = tf.einsum('bknu,ku->bkn', h, self.attn_src)
        dst = tf.einsum('bknu,ku->bkn', h, self.attn_dst)
        logits = tf.nn.leaky_relu(dst[..., :, None] + src[..., None, :], alpha=self.negative_slope)
        mask = with_self_loops(binarize(adjacency))[:, None, :, :]
        logits = tf.where(mask > 0, logits, tf.constant(NEG_INF, dtype=logits.dtype))
        return h, tf.nn.softmax(logits, axis=-1)

    def call(self, x, adjacency):
        h, alpha = self.attention(x, adjacency)
        out = tf.einsum('bkij,bkju->bkiu', alpha, h)
        if self.concat:
            out = tf.transpose(out, [0, 2, 1, 3])
            out = tf.reshape(out, [tf.shape(out)[0], tf.shape(out)[1], self.heads * self.units])
        else:
            out = tf.reduce_mean(out, axis=1)
        return out + self.bias


class GINConv(_Conv):
    """MLP((1 + eps) x_i + sum over neighbours x_j), two affine layers."""

    def __init__(self, in_dim, units, seed, epsilon=0.0, **kwargs):
        super(GINConv, self).__init__(seed, **kwargs)
        self.units = units
        self.epsilon = float(epsilon)
        self.kernel_1 = self._weight('kernel_1', (in_dim, units))
        self.bias_1 = self._weight('bias_1', (units,), zeros=True)
        self.kernel_2 = self._weight('kernel_2', (units, units))
        self.bias_2 = self._weight('bias_2', (units,), zeros=True)
        self.built = True

    def aggregate(self, x, adjacency):
        return (1.0 + self.epsilon) * x + tf.matmul(binarize(adjacency), x)

    def call(self, x, adjacency):
        h = tf.nn.relu(tf.matmul(self.aggregate(x, adjacency), self.kernel_1) + self.bias_1)
        return tf.matmul(h, self.kernel_2) + self.bias_2


class SAGEConv(_Conv):
    """x_i W_self + agg_j(x_j) W_neigh + b; agg is mean or max over neighbours."""

    def __init__(self, in_dim, units, seed, aggregator='mean', **kwargs):
        super(SAGEConv, self).__init__(seed, **kwargs)
        if aggregator not in ('mean', 'max'):
            raise ValueError('unknown GraphSAGE aggregator %r' % (aggregator,))
        self.units = units
        self.aggregator = aggregator
        self.kernel_self = self._weight('kernel_self', (in_dim, units))
        self.kernel_neigh = self._weight('kernel_neigh', (in_dim, units))
        self.bias = self._weight('bias', (units,), zeros=True)
        self.built = True

    def aggregate(self, x, adjacency):
        mask = binarize(adjacency)
        degree = tf.reduce_sum(mask, axis=-1, keepdims=True)
        if self.aggregator == 'mean':
            return tf.matmul(mask, x) / tf.maximum(degree, 1.0)
        candidates = tf.where(mask[..., None] > 0, x[:, None, :, :],
                              tf.constant(NEG_INF, dtype=x.dtype))
        return tf.where(degree > 0, tf.reduce_max(candidates, axis=2), tf.zeros_like(x))

    def call(self, x, adjacency):
        return (tf.matmul(x, self.kernel_self) + tf.matmul(self.aggregate(x, adjacency), self.kernel_neigh)
                + self.bias)
