"""Top-K% edge retention, the graph-density knob of every GNN experiment."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from brainbench.connectome.connectivity import ConnectivityMatrix, NodeFeatureMatrix, n_pairs

logger = logging.getLogger(__name__)


class SignMode(str, enum.Enum):
    POSITIVE_ONLY = 'positive_only'
    SIGNED = 'signed'


@dataclass(frozen=True)
class BrainGraph:
    adjacency: np.ndarray
    density_k: float
    sign_mode: SignMode
    node_features: Optional[NodeFeatureMatrix] = None

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=np.float64)
        if not np.array_equal(adj, adj.T):
            raise ValueError('graph adjacency must be symmetric')
        if np.any(np.diag(adj) != 0.0):
            raise ValueError('graph adjacency must have a zero diagonal')
        if SignMode(self.sign_mode) is SignMode.POSITIVE_ONLY and np.any(adj < 0):
            raise ValueError('positive_only graph holds negative weights')
        if self.node_features is not None and self.node_features.values.shape[0] != adj.shape[0]:
            raise ValueError('node features have %d rows for a %d-node graph'
                             % (self.node_features.values.shape[0], adj.shape[0]))
        object.__setattr__(self, 'adjacency', adj)
        object.__setattr__(self, 'sign_mode', SignMode(self.sign_mode))

    @property
    def n_edges(self):
        return int(np.count_nonzero(np.triu(self.adjacency, k=1)))

    def with_features(self, features):
        return BrainGraph(self.adjacency, self.density_k, self.sign_mode, features)


def edge_budget(n, k_percent):
    """E = ceil(k/100 * n(n-1)/2), free of float round-off."""
    if not 0 <= k_percent <= 100:
        raise ValueError('k_percent must lie in [0, 100], got %r' % (k_percent,))
    exact = Fraction(str(k_percent)) * n_pairs(n) / 100
    return int(math.ceil(exact))


def _ranked_pairs(weights, keys):
    # lexsort sorts by the last key first: key descending, then i asc, then j asc
    n = weights.shape[0]
    rows, cols = np.triu_indices(n, k=1)
    order = np.lexsort((cols, rows, -keys[rows, cols]))
    return rows[order], cols[order]


def threshold_top_k(conn, k_percent, sign_mode=SignMode.POSITIVE_ONLY):
    """Keep the strongest K% of ROI pairs as weighted, undirected edges.

    positive_only ranks positive weights only and keeps min(E, #positive);
    signed ranks by |weight| and keeps E pairs with their original sign.
    Ties at the cutoff fall to the lexicographically smaller (i, j).
    """
    sign_mode = SignMode(sign_mode)
    values = conn.values if isinstance(conn, ConnectivityMatrix) else np.asarray(conn, dtype=np.float64)
    n = values.shape[0]
    budget = edge_budget(n, k_percent)
    adjacency = np.zeros((n, n), dtype=np.float64)
    if budget == 0:
        return BrainGraph(adjacency, float(k_percent), sign_mode)

    if sign_mode is SignMode.POSITIVE_ONLY:
        rows, cols = _ranked_pairs(values, values)
        eligible = values[rows, cols] > 0
        rows, cols = rows[eligible], cols[eligible]
    else:
        rows, cols = _ranked_pairs(values, np.abs(values))
        eligible = values[rows, cols] != 0
        rows, cols = rows[eligible], cols[eligible]

    rows, cols = rows[:budget], cols[:budget]
    adjacency[rows, cols] = values[rows, cols]
    adjacency[cols, rows] = values[rows, cols]
    logger.debug('kept %d of %d pairs at K=%s%% (%s)', rows.size, n_pairs(n), k_percent, sign_mode.value)
    return BrainGraph(adjacency, float(k_percent), sign_mode)


def threshold_batch(matrices, k_percent, sign_mode=SignMode.POSITIVE_ONLY):
    """Adjacency stack for a (subjects, n, n) connectivity stack."""
    return np.stack([threshold_top_k(m, k_percent, sign_mode).adjacency for m in matrices])
