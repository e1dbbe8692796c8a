"""Two-phase training: GAT pathway alone first, then both pathways jointly."""
from __future__ import annotations

import logging

import numpy as np
import tensorflow as tf

from brainbench.graph_models.train import fit_model

logger = logging.getLogger(__name__)

PHASE1_GRID = (10, 20, 50)


def lm_freeze_hook(model, phase1_epochs):
    """Gradient hook zeroing the head's u-slice rows during phase 1.

    Runs after weight decay, so frozen rows stay bit-identical under Adam.
    """
    mask = np.ones(model.head_kernel.shape)
    mask[model.u_rows] = 0.0
    mask = tf.constant(mask, dtype=model.head_kernel.dtype)

    def hook(epoch, variables, grads):
        if epoch >= phase1_epochs:
            return grads
        return [g * mask if v is model.head_kernel else g for v, g in zip(variables, grads)]
    return hook


def phased_train(model, train_arrays, val_arrays, config, phase1_epochs, on_epoch_end=None):
    """Trains a DualPathwayModel in place; returns (model, TrainHistory).

    The best epoch is chosen among the joint (phase 2) epochs only.
    """
    if not 0 <= phase1_epochs < config.epochs:
        raise ValueError('phase1_epochs must lie in [0, %d), got %r' % (config.epochs, phase1_epochs))
    logger.info('phased training: %d frozen-LM epochs, %d joint epochs', phase1_epochs,
                config.epochs - phase1_epochs)
    _, history = fit_model(model, train_arrays, val_arrays, config,
                           gradient_hook=lm_freeze_hook(model, phase1_epochs),
                           select_from_epoch=phase1_epochs, on_epoch_end=on_epoch_end)
    return model, history
