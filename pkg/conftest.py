import numpy as np
import pytest
import tensorflow as tf

from brainbench.connectome import TimeSeriesMatrix, pearson_connectivity
from brainbench.data_io import SyntheticConfig, Task, generate_synthetic


@pytest.fixture
def random_bold():
    def make(n_roi=8, t=40, seed=0):
        return TimeSeriesMatrix(np.random.default_rng(seed).standard_normal((n_roi, t)))
    return make


@pytest.fixture
def random_conn(random_bold):
    def make(n=8, seed=0, t=None):
        return pearson_connectivity(random_bold(n_roi=n, t=t or 3 * n, seed=seed))
    return make


@pytest.fixture(scope='session')
def small_dataset():
    return generate_synthetic(SyntheticConfig(n_subjects=40, n_roi=8, series_length=32,
                                              n_signal_edges=6, effect_size=0.8, seed=3))


@pytest.fixture(scope='session')
def small_regression_dataset():
    return generate_synthetic(SyntheticConfig(n_subjects=40, n_roi=8, series_length=32,
                                              n_signal_edges=6, effect_size=0.8,
                                              task=Task.REGRESSION, seed=5))


def _loss_and_grads(model, inputs, loss_fn):
    with tf.GradientTape() as tape:
        loss = loss_fn(model(inputs, training=False))
    return float(loss), tape.gradient(loss, model.trainable_variables)


@pytest.fixture
def gradient_check():
    """Relative error between tape gradients and central differences.

    `loss_fn` maps the model output to a scalar. Every trainable entry is
    perturbed by +-eps; the error is ||g_tape - g_fd|| / (||g_tape|| + ||g_fd||).
    """
    def check(model, inputs, loss_fn, eps=1e-6):
        _, grads = _loss_and_grads(model, inputs, loss_fn)
        analytic, numeric = [], []
        for var, grad in zip(model.trainable_variables, grads):
            base = np.array(var.numpy(), dtype=np.float64)
            grad = np.zeros_like(base) if grad is None else np.asarray(grad)
            fd = np.zeros_like(base)
            for idx in np.ndindex(base.shape):
                for sign in (1.0, -1.0):
                    shifted = base.copy()
                    shifted[idx] += sign * eps
                    var.assign(shifted)
                    loss = float(loss_fn(model(inputs, training=False)))
                    fd[idx] += sign * loss / (2 * eps)
            var.assign(base)
            analytic.append(grad.ravel())
            numeric.append(fd.ravel())
        a, n = np.concatenate(analytic), np.concatenate(numeric)
        return np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-300)
    return check
