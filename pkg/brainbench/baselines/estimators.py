"""Classical and MLP estimators on the vectorized upper triangle.

Classical kinds delegate to scikit-learn. Scale-sensitive kinds are wrapped in
a train-fitted StandardScaler; tree and Bayes kinds see raw features. When the
hyperparameters carry a feature count `m`, p-value selection runs on the
training rows inside `fit_estimator` and the kept indices travel with the
fitted estimator.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.special import expit
from sklearn.compose import TransformedTargetRegressor
from sklearn.ensemble import RandomForestClassifier, RandomForestRegressor
from sklearn.kernel_ridge import KernelRidge
from sklearn.linear_model import ElasticNet, LinearRegression, LogisticRegression
from sklearn.naive_bayes import GaussianNB
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler
from sklearn.svm import SVC, SVR

from brainbench.baselines.mlp import build_mlp
from brainbench.baselines.selection import feature_pvalues, select_top_m
from brainbench.connectome import devectorize, n_pairs
from brainbench.data_io import Task
from brainbench.graph_models.train import Trainer, TrainConfig

logger = logging.getLogger(__name__)

CLASSIFICATION_KINDS = ('logistic', 'elasticnet', 'svm', 'random_forest', 'naive_bayes',
                        'mlp_flatten', 'mlp_node')
REGRESSION_KINDS = ('linear', 'elasticnet', 'svr', 'random_forest', 'kernel_ridge',
                    'mlp_flatten', 'mlp_node')
KINDS = tuple(sorted(set(CLASSIFICATION_KINDS) | set(REGRESSION_KINDS)))
MLP_KINDS = ('mlp_flatten', 'mlp_node')
SCALED_KINDS = ('logistic', 'elasticnet', 'svm', 'svr', 'kernel_ridge')
TRAIN_KEYS = ('learning_rate', 'epochs', 'batch_size', 'weight_decay')


@dataclass(frozen=True)
class EstimatorSpec:
    kind: str
    task: Task = Task.BINARY_CLASSIFICATION
    hyperparameters: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        task = Task(self.task)
        object.__setattr__(self, 'task', task)
        allowed = CLASSIFICATION_KINDS if task.is_classification else REGRESSION_KINDS
        if self.kind not in KINDS:
            raise ValueError('unknown estimator kind %r' % (self.kind,))
        if self.kind not in allowed:
            raise ValueError('estimator kind %r does not support task %s' % (self.kind, task.value))

    @property
    def is_neural(self):
        return self.kind in MLP_KINDS

    def feature_count(self, n_features):
        """Resolved feature count m ('all' or absent keeps every feature)."""
        m = self.hyperparameters.get('m', 'all')
        if m in (None, 'all'):
            return n_features
        return int(m)


@dataclass(frozen=True)
class FittedEstimator:
    spec: EstimatorSpec
    parameters: Any
    feature_indices: List[int]
    n_features: int

    @property
    def estimator(self):
        """The fitted scikit-learn model (last pipeline step), or the MLP weights."""
        params = self.parameters
        if hasattr(params, 'steps'):
            return params.steps[-1][1]
        if isinstance(params, TransformedTargetRegressor):
            return params.regressor_.steps[-1][1]
        return params


def _make_sklearn(spec):
    hp = spec.hyperparameters
    classify = spec.task.is_classification
    kind = spec.kind
    seed = spec.seed
    if kind == 'logistic':
        model = LogisticRegression(C=hp.get('C', 1.0), solver=hp.get('solver', 'lbfgs'),
                                   max_iter=hp.get('max_iter', 5000), random_state=seed)
    elif kind == 'linear':
        model = LinearRegression()
    elif kind == 'elasticnet' and classify:
        model = LogisticRegression(penalty='elasticnet', solver='saga', C=1.0 / hp.get('alpha', 1.0),
                                   l1_ratio=hp.get('l1_ratio', 0.5), max_iter=hp.get('max_iter', 5000),
                                   random_state=seed)
    elif kind == 'elasticnet':
        model = ElasticNet(alpha=hp.get('alpha', 1.0), l1_ratio=hp.get('l1_ratio', 0.5),
                           max_iter=hp.get('max_iter', 10000), random_state=seed)
    elif kind == 'svm':
        model = SVC(kernel=hp.get('kernel', 'linear'), C=hp.get('C', 1.0), random_state=seed)
    elif kind == 'svr':
        model = SVR(kernel=hp.get('kernel', 'linear'), C=hp.get('C', 1.0))
    elif kind == 'random_forest':
        cls = RandomForestClassifier if classify else RandomForestRegressor
        model = cls(n_estimators=hp.get('n_estimators', 100), max_depth=hp.get('max_depth'),
                    random_state=seed, n_jobs=1)
    elif kind == 'naive_bayes':
        model = GaussianNB()
    else:
        model = KernelRidge(alpha=hp.get('alpha', 1.0), kernel=hp.get('kernel', 'linear'))

    if kind not in SCALED_KINDS:
        return model
    pipeline = make_pipeline(StandardScaler(), model)
    if kind == 'kernel_ridge':
        # KernelRidge has no intercept
        return TransformedTargetRegressor(regressor=pipeline, transformer=StandardScaler())
    return pipeline


def _check_inputs(X, y=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError('X must be a samples x features matrix, got shape %s' % (X.shape,))
    if not np.all(np.isfinite(X)):
        raise ValueError('X contains non-finite values')
    if y is None:
        return X
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] != y.size:
        raise ValueError('X has %d rows but y has %d entries' % (X.shape[0], y.size))
    if not np.all(np.isfinite(y)):
        raise ValueError('y contains non-finite values')
    return X, y


def _mlp_inputs(kind, X):
    if kind == 'mlp_flatten':
        return (X,)
    return (np.stack([devectorize(row) for row in X]),)


def _fit_mlp(spec, X, y, X_val, y_val):
    hp = spec.hyperparameters
    n = int(round((1 + np.sqrt(1 + 8 * X.shape[1])) / 2))
    if n_pairs(n) != X.shape[1]:
        raise ValueError('%s needs the full upper triangle, got %d features' % (spec.kind, X.shape[1]))
    model = build_mlp(spec.kind, n, spec.task.n_outputs, hidden_dim=hp.get('hidden_dim', 64),
                      n_layers=hp.get('n_layers', 1), seed=spec.seed)
    config = TrainConfig(seed=spec.seed, **{k: hp[k] for k in TRAIN_KEYS if k in hp})
    if X_val is None:
        X_val, y_val = X, y
    trainer = Trainer(model, spec.task, config)
    trainer.fit(_mlp_inputs(spec.kind, X), y, _mlp_inputs(spec.kind, X_val), y_val)
    return model.get_weights()


def fit_estimator(spec, X, y, X_val=None, y_val=None):
    """Fits `spec` on (X, y); returns a FittedEstimator.

    MLP kinds select their best epoch on (X_val, y_val), falling back to the
    training rows when no validation set is given.
    """
    X, y = _check_inputs(X, y)
    n_features = X.shape[1]
    if spec.is_neural:
        if X_val is not None:
            X_val, y_val = _check_inputs(X_val, y_val)
        weights = _fit_mlp(spec, X, y, X_val, y_val)
        return FittedEstimator(spec, weights, list(range(n_features)), n_features)

    m = spec.feature_count(n_features)
    if m < n_features:
        indices = select_top_m(feature_pvalues(X, y, spec.task), m)
    else:
        indices = list(range(n_features))
    model = _make_sklearn(spec)
    model.fit(X[:, indices], y.astype(int) if spec.task.is_classification else y)
    logger.debug('fitted %s on %d samples, %d of %d features', spec.kind, X.shape[0], len(indices),
                 n_features)
    return FittedEstimator(spec, model, indices, n_features)


def predict(fitted, X):
    """Class-1 scores in [0, 1] (classification) or real predictions."""
    X = _check_inputs(X)
    if X.shape[1] != fitted.n_features:
        raise ValueError('estimator was fitted on %d features, got %d' % (fitted.n_features, X.shape[1]))
    spec = fitted.spec
    if spec.is_neural:
        n = int(round((1 + np.sqrt(1 + 8 * X.shape[1])) / 2))
        model = build_mlp(spec.kind, n, spec.task.n_outputs,
                          hidden_dim=spec.hyperparameters.get('hidden_dim', 64),
                          n_layers=spec.hyperparameters.get('n_layers', 1), seed=spec.seed)
        model.set_weights(fitted.parameters)
        trainer = Trainer(model, spec.task, TrainConfig(epochs=1))
        return trainer.predict(_mlp_inputs(spec.kind, X))

    model = fitted.parameters
    Xs = X[:, fitted.feature_indices]
    if not spec.task.is_classification:
        return np.asarray(model.predict(Xs), dtype=np.float64).ravel()
    if spec.kind == 'svm':
        return expit(model.decision_function(Xs))
    classes = list(model.classes_)
    return model.predict_proba(Xs)[:, classes.index(1)]
