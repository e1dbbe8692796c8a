"""Mini-batch Adam training with best-epoch selection on the validation set."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import tensorflow as tf

from brainbench.bench.metrics import evaluate
from brainbench.connectome.connectivity import warn
from brainbench.data_io import Task
from brainbench.graph_models.gnn import build_graph_net
from brainbench.graph_models.layers import DTYPE

logger = logging.getLogger(__name__)

PREDICT_BATCH = 256


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 16
    weight_decay: float = 1e-4
    learning_rate: float = 1e-3
    optimizer: str = 'adam'
    selection_metric: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError('epochs must be >= 1, got %r' % (self.epochs,))
        if self.batch_size < 1:
            raise ValueError('batch_size must be >= 1, got %r' % (self.batch_size,))
        if self.learning_rate < 0:
            raise ValueError('learning_rate must be >= 0, got %r' % (self.learning_rate,))
        if self.optimizer != 'adam':
            raise ValueError('unsupported optimizer %r' % (self.optimizer,))

    def replace(self, **changes):
        values = dict(self.__dict__)
        values.update(changes)
        return TrainConfig(**values)


@dataclass
class TrainHistory:
    train_loss: List[float] = field(default_factory=list)
    val_metric: List[float] = field(default_factory=list)
    best_epoch: int = -1
    best_val_metric: float = float('nan')

    def __len__(self):
        return len(self.train_loss)

    def to_dict(self):
        return {'train_loss': list(self.train_loss), 'val_metric': list(self.val_metric),
                'best_epoch': self.best_epoch, 'best_val_metric': self.best_val_metric}


class TrainingDiverged(RuntimeError):

    def __init__(self, message, history):
        super(TrainingDiverged, self).__init__(message)
        self.history = history


def loss_for(task):
    """Cross-entropy on 2 logits (classification) or MSE on the scalar output."""
    if Task(task).is_classification:
        def loss(outputs, targets):
            labels = tf.cast(targets, tf.int32)
            return tf.reduce_mean(tf.nn.sparse_softmax_cross_entropy_with_logits(labels, outputs))
    else:
        def loss(outputs, targets):
            return tf.reduce_mean(tf.square(outputs[:, 0] - tf.cast(targets, outputs.dtype)))
    return loss


def scores_from_outputs(outputs, task):
    """Class-1 probability, or the regression output."""
    outputs = np.asarray(outputs, dtype=np.float64)
    if Task(task).is_classification:
        return tf.nn.softmax(outputs, axis=-1).numpy()[:, 1]
    return outputs[:, 0]


def _take(inputs, indices):
    return tuple(tf.constant(a[indices], dtype=DTYPE) for a in inputs)


def predict_outputs(model, inputs, batch_size=PREDICT_BATCH):
    n = inputs[0].shape[0]
    chunks = []
    for start in range(0, n, batch_size):
        idx = np.arange(start, min(start + batch_size, n))
        chunks.append(model(_take(inputs, idx), training=False).numpy())
    outputs = np.concatenate(chunks, axis=0)
    if not np.all(np.isfinite(outputs)):
        raise FloatingPointError('non-finite model outputs for %d samples' % n)
    return outputs


class Trainer(object):
    """Trains any Keras model fed with a tuple of per-sample arrays.

    `gradient_hook(epoch, variables, grads)` may rewrite the gradients after
    weight decay is added (used to freeze parameter slices). Best-epoch
    selection only considers epochs >= `select_from_epoch`.
    `on_epoch_end(epoch, model)` runs after every epoch's updates.
    """

    def __init__(self, model, task, config, gradient_hook: Optional[Callable] = None,
                 select_from_epoch=0, on_epoch_end: Optional[Callable] = None):
        self.model = model
        self.task = Task(task)
        self.config = config
        self.gradient_hook = gradient_hook
        self.select_from_epoch = select_from_epoch
        self.on_epoch_end = on_epoch_end
        if config.selection_metric not in (None, self.task.selection_metric):
            raise ValueError('selection metric %r does not fit task %s'
                             % (config.selection_metric, self.task.value))
        if not 0 <= select_from_epoch < config.epochs:
            raise ValueError('selection start %d outside [0, %d)' % (select_from_epoch, config.epochs))
        self.loss = loss_for(self.task)
        self.optimizer = tf.keras.optimizers.Adam(learning_rate=config.learning_rate)

    def _step(self, epoch, batch, targets):
        variables = self.model.trainable_variables
        # batch-norm moving statistics stay frozen when nothing is learned
        training = self.config.learning_rate > 0
        with tf.GradientTape() as tape:
            loss = self.loss(self.model(batch, training=training), targets)
        grads = tape.gradient(loss, variables)
        grads = [tf.zeros_like(v) if g is None else g for g, v in zip(grads, variables)]
        if self.config.weight_decay:
            grads = [g + self.config.weight_decay * v for g, v in zip(grads, variables)]
        if self.gradient_hook is not None:
            grads = self.gradient_hook(epoch, variables, grads)
        self.optimizer.apply_gradients(zip(grads, variables))
        return float(loss)

    def validation_metric(self, inputs, targets):
        try:
            return evaluate(self.predict(inputs), targets, self.task)
        except ValueError as e:
            warn('validation metric undefined (%s)', e)
            return float('nan')

    def fit(self, train_inputs, train_targets, val_inputs, val_targets):
        """Trains for config.epochs and restores the best-epoch weights.

        Raises:
            TrainingDiverged: on a non-finite training loss
        """
        config = self.config
        tf.keras.utils.set_random_seed(config.seed)
        rng = np.random.default_rng(config.seed)
        train_targets = np.asarray(train_targets, dtype=np.float64)
        n = train_targets.size
        history = TrainHistory()
        best_weights = None

        for epoch in range(config.epochs):
            order = rng.permutation(n)
            losses, sizes = [], []
            for start in range(0, n, config.batch_size):
                idx = order[start:start + config.batch_size]
                loss = self._step(epoch, _take(train_inputs, idx),
                                  tf.constant(train_targets[idx], dtype=DTYPE))
                if not math.isfinite(loss):
                    raise TrainingDiverged('non-finite loss at epoch %d' % epoch, history)
                losses.append(loss)
                sizes.append(idx.size)
            history.train_loss.append(float(np.average(losses, weights=sizes)))
            if self.on_epoch_end is not None:
                self.on_epoch_end(epoch, self.model)
            metric = self.validation_metric(val_inputs, val_targets)
            history.val_metric.append(metric)
            logger.debug('epoch %d loss %.5f val %s %.4f', epoch, history.train_loss[-1],
                         self.task.selection_metric, metric)

            if epoch < self.select_from_epoch:
                continue
            if best_weights is None or metric > history.best_val_metric or (
                    math.isnan(history.best_val_metric) and not math.isnan(metric)):
                history.best_epoch = epoch
                history.best_val_metric = metric
                best_weights = self.model.get_weights()

        self.model.set_weights(best_weights)
        logger.info('best epoch %d of %d, val %s %.4f', history.best_epoch, config.epochs,
                    self.task.selection_metric, history.best_val_metric)
        return history

    def predict(self, inputs):
        return scores_from_outputs(predict_outputs(self.model, inputs), self.task)


def fit_model(model, train_arrays, val_arrays, config, **trainer_kwargs):
    """Fits a model exposing `feed(arrays)`; returns (trainer, history)."""
    trainer = Trainer(model, train_arrays.task, config, **trainer_kwargs)
    history = trainer.fit(model.feed(train_arrays), train_arrays.targets,
                          model.feed(val_arrays), val_arrays.targets)
    return trainer, history


def train(spec, train_arrays, val_arrays, config):
    """Trains a GraphNet for `spec`; returns (best-epoch parameters, TrainHistory)."""
    model = build_graph_net(spec, train_arrays.n_roi, train_arrays.task.n_outputs)
    _, history = fit_model(model, train_arrays, val_arrays, config)
    return model.get_weights(), history
