"""Edge- and node-level importance from a trained dual-pathway model."""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import List

import numpy as np
import tensorflow as tf

from brainbench.connectome import devectorize, edge_budget
from brainbench.connectome.connectivity import warn
from brainbench.graph_models.layers import DTYPE

logger = logging.getLogger(__name__)

TOP_NODES = 20
ATTENTION_BATCH = 64


class MapKind(str, enum.Enum):
    ATTENTION = 'attention'
    LM_WEIGHT = 'lm_weight'

    @property
    def normalization(self):
        return 'minmax_01' if self is MapKind.ATTENTION else 'maxabs_pm1'


class NodeMode(str, enum.Enum):
    ATTENTION_ROWSUM = 'attention_rowsum'
    POSITIVE_WEIGHTS = 'positive_weights'
    NEGATIVE_WEIGHTS = 'negative_weights'


@dataclass(frozen=True)
class EdgeImportanceMap:
    values: np.ndarray
    kind: MapKind

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        kind = MapKind(self.kind)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError('edge map must be square, got shape %s' % (values.shape,))
        if np.max(np.abs(values - values.T), initial=0.0) > 1e-12:
            raise ValueError('edge map must be symmetric')
        if np.any(np.diag(values) != 0):
            raise ValueError('edge map must have a zero diagonal')
        low = 0.0 if kind is MapKind.ATTENTION else -1.0
        if values.min(initial=0.0) < low - 1e-12 or values.max(initial=0.0) > 1.0 + 1e-12:
            raise ValueError('%s map values outside [%g, 1]' % (kind.value, low))
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'kind', kind)

    @property
    def normalization(self):
        return self.kind.normalization

    @property
    def n(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class NodeImportance:
    scores: np.ndarray
    mode: NodeMode
    top_k_indices: List[int]


def aggregate_attention(attention):
    """Heads averaged, symmetrized, averaged over samples, min-max scaled to [0, 1].

    `attention` is (samples, heads, n, n) or (samples, n, n). The diagonal is
    zeroed and min and max come from the off-diagonal entries only, so the
    strongest edge maps to 1. A single edge (n = 2) maps to 1; equal
    off-diagonal entries for n > 2 map to zeros with a warning.
    """
    attention = np.asarray(attention, dtype=np.float64)
    if attention.ndim == 3:
        attention = attention[:, None]
    if attention.ndim != 4 or attention.shape[0] == 0:
        raise ValueError('attention must be a nonempty (samples, heads, n, n) stack')
    m = attention.mean(axis=1)
    m = (m + np.swapaxes(m, -1, -2)) / 2.0
    m = m.mean(axis=0)
    off_diagonal = m[np.triu_indices(m.shape[0], k=1)]
    if off_diagonal.size == 1:
        scaled = np.ones_like(m)
    elif off_diagonal.size == 0 or off_diagonal.max() == off_diagonal.min():
        warn('attention map is constant; min-max normalization gives zeros')
        scaled = np.zeros_like(m)
    else:
        low, high = off_diagonal.min(), off_diagonal.max()
        scaled = (m - low) / (high - low)
    np.fill_diagonal(scaled, 0.0)
    return EdgeImportanceMap((scaled + scaled.T) / 2.0, MapKind.ATTENTION)


def mean_attention_map(model, arrays, batch_size=ATTENTION_BATCH):
    """First-layer GAT attention of `model`, aggregated over the samples in `arrays`."""
    if len(arrays) == 0:
        raise ValueError('attention map needs a nonempty test set')
    adjacency, bold, _ = model.feed(arrays)
    chunks = []
    for start in range(0, len(arrays), batch_size):
        stop = start + batch_size
        alpha = model.first_layer_attention(tf.constant(bold[start:stop], dtype=DTYPE),
                                            tf.constant(adjacency[start:stop], dtype=DTYPE))
        chunks.append(alpha.numpy())
    logger.info('aggregated attention over %d samples', len(arrays))
    return aggregate_attention(np.concatenate(chunks, axis=0))


def signed_weight_map(weights, n):
    """Devectorized u-weights divided by their largest magnitude."""
    weights = np.asarray(weights, dtype=np.float64).ravel()
    scale = np.max(np.abs(weights), initial=0.0)
    if scale == 0:
        warn('LM weights are all zero; weight map is zero')
        return EdgeImportanceMap(np.zeros((n, n)), MapKind.LM_WEIGHT)
    return EdgeImportanceMap(devectorize(weights / scale, n, diagonal=0.0), MapKind.LM_WEIGHT)


def lm_weight_map(model):
    """Head weights over u; class-1 minus class-0 weights for classification."""
    w = np.asarray(model.head_kernel.numpy()[model.u_rows])
    w = w[:, 1] - w[:, 0] if model.task.is_classification else w[:, 0]
    return signed_weight_map(w, model.n_roi)


def _importance(edge_map):
    values = edge_map.values
    return values if edge_map.kind is MapKind.ATTENTION else np.abs(values)


def top_edges(edge_map, fraction):
    """ceil(fraction% of pairs) strongest edges as (i, j, value), i < j.

    Attention ranks by value, LM weights by magnitude; ties go to the
    lexicographically smaller pair.
    """
    if not 0 < fraction <= 100:
        raise ValueError('fraction must lie in (0, 100], got %r' % (fraction,))
    n = edge_map.n
    rows, cols = np.triu_indices(n, k=1)
    keys = _importance(edge_map)[rows, cols]
    order = np.lexsort((cols, rows, -keys))[:edge_budget(n, fraction)]
    return [(int(rows[k]), int(cols[k]), float(edge_map.values[rows[k], cols[k]])) for k in order]


def node_importance(edge_map, mode, top_k=TOP_NODES):
    mode = NodeMode(mode)
    values = edge_map.values
    if mode is NodeMode.ATTENTION_ROWSUM:
        if edge_map.kind is not MapKind.ATTENTION:
            raise ValueError('attention_rowsum needs an attention map, got %s' % edge_map.kind.value)
        scores = values.sum(axis=1)
    else:
        if edge_map.kind is not MapKind.LM_WEIGHT:
            raise ValueError('%s needs an lm_weight map, got %s' % (mode.value, edge_map.kind.value))
        sign = 1.0 if mode is NodeMode.POSITIVE_WEIGHTS else -1.0
        scores = np.maximum(sign * values, 0.0).sum(axis=1)
    order = np.lexsort((np.arange(scores.size), -scores))
    return NodeImportance(scores, mode, order[:top_k].tolist())
