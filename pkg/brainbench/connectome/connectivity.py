"""Pearson connectivity, upper-triangle vectors and connection profiles.

All arrays in this module are float64 and every function is pure.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)


class ConnectomeWarning(UserWarning):
    """Recoverable numerical degeneracy (zero variance, empty selection...)."""


def warn(message, *args):
    text = message % args if args else message
    logger.warning(text)
    warnings.warn(text, ConnectomeWarning, stacklevel=3)


@dataclass(frozen=True)
class TimeSeriesMatrix:
    values: np.ndarray
    roi_labels: Tuple[str, ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError('BOLD series must be a 2-D (n_roi x t) matrix, got shape %s'
                             % (values.shape,))
        n_roi, t = values.shape
        if n_roi < 2 or t < 2:
            raise ValueError('BOLD series needs n_roi >= 2 and t >= 2, got %d x %d' % (n_roi, t))
        labels = tuple(self.roi_labels) or tuple('roi_%d' % i for i in range(n_roi))
        if len(labels) != n_roi:
            raise ValueError('%d ROI labels given for %d ROIs' % (len(labels), n_roi))
        bad = np.flatnonzero(~np.isfinite(values).all(axis=1))
        if bad.size:
            raise ValueError('non-finite BOLD values in ROI %d (%s)' % (bad[0], labels[bad[0]]))
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'roi_labels', labels)

    @property
    def n_roi(self):
        return self.values.shape[0]

    @property
    def length(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class ConnectivityMatrix:
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError('connectivity must be square, got shape %s' % (values.shape,))
        if not np.array_equal(values, values.T):
            raise ValueError('connectivity matrix is not symmetric')
        if not np.all(np.diag(values) == 1.0):
            raise ValueError('connectivity matrix must have a unit diagonal')
        if np.any(np.abs(values) > 1.0):
            raise ValueError('connectivity entries must lie in [-1, 1]')
        object.__setattr__(self, 'values', values)

    @property
    def n(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    n: int
    index_map: List[Tuple[int, int]] = field(default_factory=list, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if values.size != n_pairs(self.n):
            raise ValueError('feature vector of length %d does not match n=%d (expected %d)'
                             % (values.size, self.n, n_pairs(self.n)))
        object.__setattr__(self, 'values', values)
        if not self.index_map:
            rows, cols = np.triu_indices(self.n, k=1)
            object.__setattr__(self, 'index_map', list(zip(rows.tolist(), cols.tolist())))


@dataclass(frozen=True)
class NodeFeatureMatrix:
    values: np.ndarray
    roi_labels: Tuple[str, ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] < 1:
            raise ValueError('node features must be an n x d matrix with d > 0')
        object.__setattr__(self, 'values', values)


def n_pairs(n):
    return n * (n - 1) // 2


def pearson_connectivity(bold):
    """Pearson correlation between every pair of ROI series.

    Args:
        bold (TimeSeriesMatrix): n_roi x t series

    Returns:
        ConnectivityMatrix: symmetric, unit diagonal, entries clamped to [-1, 1].
        ROIs with zero variance correlate 0 with every other ROI.
    """
    if not isinstance(bold, TimeSeriesMatrix):
        bold = TimeSeriesMatrix(bold)
    centered = bold.values - bold.values.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum('ij,ij->i', centered, centered))

    flat = norms == 0.0
    if flat.any():
        warn('zero-variance series for ROI(s) %s; their correlations are set to 0',
             ', '.join(bold.roi_labels[i] for i in np.flatnonzero(flat)))
    scaled = np.zeros_like(centered)
    scaled[~flat] = centered[~flat] / norms[~flat, None]

    corr = np.clip(scaled @ scaled.T, -1.0, 1.0)
    # mirror the strict upper triangle so the result is exactly symmetric
    upper = np.triu(corr, k=1)
    corr = upper + upper.T
    np.fill_diagonal(corr, 1.0)
    return ConnectivityMatrix(corr)


def pearson_connectivity_batch(series):
    """Stacked `pearson_connectivity` over a (subjects, n_roi, t) array."""
    return np.stack([pearson_connectivity(TimeSeriesMatrix(s)).values for s in series])


def vectorize_upper(conn):
    """Row-major strict upper triangle of `conn` as a FeatureVector."""
    values = conn.values if isinstance(conn, ConnectivityMatrix) else np.asarray(conn)
    n = values.shape[0]
    rows, cols = np.triu_indices(n, k=1)
    return FeatureVector(values[rows, cols].copy(), n)


def vectorize_batch(matrices):
    matrices = np.asarray(matrices, dtype=np.float64)
    rows, cols = np.triu_indices(matrices.shape[-1], k=1)
    return matrices[..., rows, cols]


def devectorize(u, n=None, diagonal=1.0):
    """Inverse of `vectorize_upper`: fills both triangles, sets the diagonal."""
    if isinstance(u, FeatureVector):
        n, values = u.n, u.values
    else:
        values = np.asarray(u, dtype=np.float64).ravel()
        if n is None:
            n = int(round((1 + np.sqrt(1 + 8 * values.size)) / 2))
        if values.size != n_pairs(n):
            raise ValueError('cannot devectorize %d values into a %d x %d matrix'
                             % (values.size, n, n))
    out = np.zeros((n, n), dtype=np.float64)
    rows, cols = np.triu_indices(n, k=1)
    out[rows, cols] = values
    out[cols, rows] = values
    np.fill_diagonal(out, diagonal)
    return out


def connection_profiles(conn, roi_labels: Optional[Sequence[str]] = None):
    """Each ROI's row of the connectome, unit self-entry included."""
    values = conn.values if isinstance(conn, ConnectivityMatrix) else np.asarray(conn)
    return NodeFeatureMatrix(values.copy(), tuple(roi_labels or ()))
