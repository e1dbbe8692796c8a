"""AUROC and Pearson r, the two selection/report metrics."""
from __future__ import annotations

import logging

import numpy as np
from sklearn.metrics import roc_auc_score

from brainbench.connectome.connectivity import warn
from brainbench.data_io import Task

logger = logging.getLogger(__name__)


def auroc(scores, labels):
    """Area under the ROC curve; tied scores count one half."""
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(labels) == 1
    if positive.all() or not positive.any():
        raise ValueError('AUROC is undefined for single-class targets')
    return float(roc_auc_score(positive, scores))


def pearson_r(predictions, targets):
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    pc = predictions - predictions.mean()
    tc = targets - targets.mean()
    denom = np.sqrt(np.dot(pc, pc) * np.dot(tc, tc))
    if denom == 0:
        warn('Pearson r undefined for constant predictions or targets; reporting 0')
        return 0.0
    return float(np.clip(np.dot(pc, tc) / denom, -1.0, 1.0))


def evaluate(predictions, targets, task):
    """AUROC for classification, Pearson r for regression."""
    predictions = np.asarray(predictions, dtype=np.float64).ravel()
    targets = np.asarray(targets, dtype=np.float64).ravel()
    if predictions.shape != targets.shape:
        raise ValueError('%d predictions for %d targets' % (predictions.size, targets.size))
    if not np.all(np.isfinite(predictions)):
        raise ValueError('non-finite predictions')
    if Task(task).is_classification:
        if predictions.min() < 0 or predictions.max() > 1:
            raise ValueError('classification scores must lie in [0, 1]')
        return auroc(predictions, targets)
    return pearson_r(predictions, targets)
