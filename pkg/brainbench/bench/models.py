"""One (model, hyperparameters, split) evaluation for every benchmarked model kind."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from brainbench.baselines import (
    CLASSIFICATION_KINDS,
    KINDS as ESTIMATOR_KINDS,
    REGRESSION_KINDS,
    EstimatorSpec,
    cpm_fit_predict,
    fit_estimator,
    predict,
)
from brainbench.baselines.estimators import MLP_KINDS, TRAIN_KEYS
from brainbench.bench.metrics import evaluate
from brainbench.connectome import SignMode
from brainbench.dual_pathway import DualSpec, EncoderSpec, build_dual_model, phased_train
from brainbench.graph_models import GNNSpec, build_graph_net, fit_model
from brainbench.graph_models.train import predict_outputs, scores_from_outputs

logger = logging.getLogger(__name__)

GNN_KINDS = ('gcn', 'gat', 'gin', 'sage', 'residual', 'signed')
MODEL_KINDS = ESTIMATOR_KINDS + ('cpm',) + GNN_KINDS + ('dual',)

_SELECTION = ('m',)
PARAM_KEYS = {
    'logistic': ('C', 'solver', 'max_iter') + _SELECTION,
    'linear': _SELECTION,
    'elasticnet': ('alpha', 'l1_ratio', 'max_iter') + _SELECTION,
    'svm': ('kernel', 'C') + _SELECTION,
    'svr': ('kernel', 'C') + _SELECTION,
    'random_forest': ('n_estimators', 'max_depth') + _SELECTION,
    'naive_bayes': _SELECTION,
    'kernel_ridge': ('alpha', 'kernel') + _SELECTION,
    'mlp_flatten': ('hidden_dim', 'n_layers') + TRAIN_KEYS,
    'mlp_node': ('hidden_dim', 'n_layers') + TRAIN_KEYS,
    'cpm': ('p_threshold', 'mode'),
    'dual': ('phase1_epochs', 'n_layers', 'hidden_dim', 'heads', 'density', 'conv_layers', 'kernel_size',
             'stride', 'out_dim', 'channels') + TRAIN_KEYS,
}
for _kind in GNN_KINDS:
    PARAM_KEYS[_kind] = tuple(sorted(GNNSpec.field_names() - {'seed'})) + TRAIN_KEYS

ENCODER_KEYS = ('conv_layers', 'kernel_size', 'stride', 'out_dim', 'channels')
GAT_KEYS = ('n_layers', 'hidden_dim', 'heads', 'density')


def supports(kind, task):
    if kind in ESTIMATOR_KINDS:
        return kind in (CLASSIFICATION_KINDS if task.is_classification else REGRESSION_KINDS)
    if kind == 'cpm':
        return not task.is_classification
    return kind in MODEL_KINDS


@dataclass(frozen=True)
class CellResult:
    val_metric: float
    test_metric: float
    best_epoch: Optional[int] = None


def train_config_for(base, params, seed):
    return base.replace(seed=seed, **{k: params[k] for k in TRAIN_KEYS if k in params})


def gnn_spec(kind, params, seed):
    values = {k: v for k, v in params.items() if k in GNNSpec.field_names() and k != 'seed'}
    if kind == 'residual':
        values.setdefault('residual', True)
        values.setdefault('layer_concat', True)
    elif kind == 'signed':
        values['sign_mode'] = SignMode.SIGNED
    else:
        values['architecture'] = kind
    return GNNSpec(seed=seed, **values)


def dual_spec(params, seed):
    encoder = EncoderSpec(seed=seed, **{k: params[k] for k in ENCODER_KEYS if k in params})
    gat = GNNSpec('gat', seed=seed + 1, **{k: params[k] for k in GAT_KEYS if k in params})
    return DualSpec(encoder, gat, seed)


def _estimator_cell(kind, params, train, val, test, seed):
    task = train.task
    spec = EstimatorSpec(kind, task, dict(params), seed)
    fitted = fit_estimator(spec, train.vectors, train.targets, val.vectors, val.targets)
    return CellResult(evaluate(predict(fitted, val.vectors), val.targets, task),
                      evaluate(predict(fitted, test.vectors), test.targets, task))


def _cpm_cell(params, train, val, test):
    held_out = np.concatenate([val.vectors, test.vectors])
    predictions, _ = cpm_fit_predict(train.vectors, train.targets, held_out,
                                     p_threshold=params.get('p_threshold', 0.05), mode=params.get('mode', 'pos'))
    n_val = len(val)
    return CellResult(evaluate(predictions[:n_val], val.targets, train.task),
                      evaluate(predictions[n_val:], test.targets, train.task))


def _network_cell(model, train, val, test, config, phase1_epochs=None):
    if phase1_epochs is None:
        _, history = fit_model(model, train, val, config)
    else:
        _, history = phased_train(model, train, val, config, phase1_epochs)
    scores = scores_from_outputs(predict_outputs(model, model.feed(test)), train.task)
    return CellResult(history.best_val_metric, evaluate(scores, test.targets, train.task), history.best_epoch)


def run_cell(kind, params, train, val, test, train_config, seed):
    """Fits `kind` with `params` on train (epoch selection on val); scores val and test."""
    if kind in MLP_KINDS:
        defaults = {k: getattr(train_config, k) for k in TRAIN_KEYS}
        return _estimator_cell(kind, dict(defaults, **params), train, val, test, seed)
    if kind in ESTIMATOR_KINDS:
        return _estimator_cell(kind, params, train, val, test, seed)
    if kind == 'cpm':
        return _cpm_cell(params, train, val, test)
    config = train_config_for(train_config, params, seed)
    if kind == 'dual':
        model = build_dual_model(dual_spec(params, seed), train.n_roi, train.bold.shape[-1], train.task)
        return _network_cell(model, train, val, test, config, phase1_epochs=params.get('phase1_epochs', 10))
    model = build_graph_net(gnn_spec(kind, params, seed), train.n_roi, train.task.n_outputs)
    return _network_cell(model, train, val, test, config)
