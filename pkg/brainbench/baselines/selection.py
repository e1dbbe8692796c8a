"""Univariate p-value screening of upper-triangle features."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy import stats

from brainbench.connectome.connectivity import warn
from brainbench.data_io import Task

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureSelection:
    pvalues: np.ndarray
    m: int
    selected_indices: List[int] = field(default_factory=list)

    @classmethod
    def from_pvalues(cls, pvalues, m):
        return cls(np.asarray(pvalues), m, select_top_m(pvalues, m))


def _welch_pvalues(x1, x0):
    with np.errstate(divide='ignore', invalid='ignore'):
        pvalues = stats.ttest_ind(x1, x0, equal_var=False, axis=0).pvalue
    diff = x1.mean(axis=0) - x0.mean(axis=0)
    within = (x1.var(axis=0) + x0.var(axis=0)) == 0
    # both groups constant: perfectly separating when apart, uninformative otherwise
    pvalues = np.where(within, np.where(diff != 0, 0.0, 1.0), pvalues)
    return np.nan_to_num(pvalues, nan=1.0)


def correlation_pvalues(X, y):
    r = np.zeros(X.shape[1])
    pvalues = np.ones(X.shape[1])
    ok = ~np.all(X == X[0], axis=0) if np.any(y != y[0]) else np.zeros(X.shape[1], dtype=bool)
    if ok.any():
        result = stats.pearsonr(X[:, ok], np.broadcast_to(y[:, None], (y.size, int(ok.sum()))), axis=0)
        r[ok] = np.clip(result.statistic, -1.0, 1.0)
        pvalues[ok] = result.pvalue
    # exactly collinear columns, up to rounding in r
    pvalues[np.abs(r) > 1.0 - 1e-12] = 0.0
    return pvalues, r


def feature_correlations(X, y):
    """Pearson r between every column of X and y (0 for constant columns)."""
    return correlation_pvalues(np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.float64))[1]


def feature_pvalues(X, y, task):
    """Welch t-test p-values (classification) or correlation p-values (regression).

    Zero-variance features get p = 1 and a warning.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    task = Task(task)
    if X.shape[0] != y.shape[0]:
        raise ValueError('X has %d rows but y has %d entries' % (X.shape[0], y.shape[0]))
    if X.shape[0] < 3:
        raise ValueError('p-values need at least 3 samples, got %d' % X.shape[0])

    constant = np.all(X == X[0], axis=0)
    if constant.any():
        warn('%d zero-variance feature(s) get p = 1 (first: %d)', int(constant.sum()),
             int(np.flatnonzero(constant)[0]))

    if task.is_classification:
        x1, x0 = X[y == 1], X[y == 0]
        if x1.shape[0] < 2 or x0.shape[0] < 2:
            raise ValueError('t-test needs at least 2 samples of each class (got %d/%d)'
                             % (x0.shape[0], x1.shape[0]))
        pvalues = _welch_pvalues(x1, x0)
    else:
        pvalues = correlation_pvalues(X, y)[0]
    pvalues[constant] = 1.0
    return np.clip(pvalues, 0.0, 1.0)


def select_top_m(pvalues, m):
    """Indices of the m smallest p-values; ties go to the lower index."""
    if m < 1:
        raise ValueError('m must be >= 1, got %r' % (m,))
    pvalues = np.asarray(pvalues)
    order = np.lexsort((np.arange(pvalues.size), pvalues))
    return order[:min(int(m), pvalues.size)].tolist()
