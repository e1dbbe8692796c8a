"""Connectome-based predictive modelling (positive, negative and combined networks)."""
from __future__ import annotations

import enum
import logging

import numpy as np

from brainbench.baselines.selection import correlation_pvalues
from brainbench.connectome.connectivity import warn

logger = logging.getLogger(__name__)


class CPMMode(str, enum.Enum):
    POS = 'pos'
    NEG = 'neg'
    BOTH = 'both'


def cpm_select(X_train, y_train, p_threshold, mode):
    """Boolean masks of the positive and negative networks."""
    pvalues, r = correlation_pvalues(np.asarray(X_train, dtype=np.float64),
                                      np.asarray(y_train, dtype=np.float64))
    significant = pvalues < p_threshold
    if p_threshold >= 1.0:
        significant = np.ones_like(significant)
    positive = significant & (r > 0)
    negative = significant & (r < 0)
    mode = CPMMode(mode)
    if mode is CPMMode.POS:
        negative = np.zeros_like(negative)
    elif mode is CPMMode.NEG:
        positive = np.zeros_like(positive)
    return positive, negative


def cpm_fit_predict(X_train, y_train, X_test, p_threshold=0.05, mode=CPMMode.POS):
    """Summary-score CPM: sum the selected edges, fit target ~ score, apply to test.

    Returns:
        (predictions, n_selected). Empty selections or constant scores predict
        the training mean.
    """
    if not 0 < p_threshold <= 1:
        raise ValueError('p_threshold must lie in (0, 1], got %r' % (p_threshold,))
    X_train = np.asarray(X_train, dtype=np.float64)
    X_test = np.asarray(X_test, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)

    positive, negative = cpm_select(X_train, y_train, p_threshold, mode)
    n_selected = int(positive.sum() + negative.sum())
    mean = float(y_train.mean())
    if n_selected == 0:
        warn('CPM (%s, p < %g) selected no edges; predicting the training mean', CPMMode(mode).value,
             p_threshold)
        return np.full(X_test.shape[0], mean), 0

    def score(X):
        return X[:, positive].sum(axis=1) - X[:, negative].sum(axis=1)

    s_train = score(X_train)
    if np.all(s_train == s_train[0]):
        warn('CPM summary score is constant on train; predicting the training mean')
        return np.full(X_test.shape[0], mean), n_selected
    slope, intercept = np.polyfit(s_train, y_train, 1)
    logger.debug('CPM %s kept %d edges, slope %.4g', CPMMode(mode).value, n_selected, slope)
    return slope * score(X_test) + intercept, n_selected
