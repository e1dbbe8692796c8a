"""Graph-density ablation: retrain at several top-K% densities and collect test metrics."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
from scipy import stats

from brainbench.bench.metrics import evaluate
from brainbench.data_io import ConnectomeArrays, SplitSpec, split_indices
from brainbench.graph_models.gnn import build_graph_net
from brainbench.graph_models.train import TrainConfig, fit_model

logger = logging.getLogger(__name__)

SPLIT_SEED_OFFSET = 1000
INIT_SEED_OFFSET = 2000


def run_seeds(master_seed, run):
    """(split seed, init seed) of one run."""
    return master_seed + SPLIT_SEED_OFFSET + run, master_seed + INIT_SEED_OFFSET + run


def _key(k):
    return ('%g' % k)


@dataclass
class SweepResult:
    model: str
    k_values: List[float]
    per_k: Dict[str, dict] = field(default_factory=dict)

    def record(self, k, runs):
        runs = [float(r) for r in runs]
        self.per_k[_key(k)] = {'mean': float(np.mean(runs)), 'std': float(np.std(runs)), 'runs': runs}

    def summary(self, k):
        return self.per_k[_key(k)]

    def rows(self):
        """(model, K, mean, std) per density, in sweep order."""
        return [(self.model, k, self.summary(k)['mean'], self.summary(k)['std']) for k in self.k_values]

    def monotone_trend(self):
        """Spearman rho between K and mean metric (negative: denser graphs do worse)."""
        if len(self.k_values) < 2:
            return float('nan')
        means = [self.summary(k)['mean'] for k in self.k_values]
        if np.all(np.asarray(means) == means[0]):
            return float('nan')
        return float(stats.spearmanr(self.k_values, means)[0])

    def to_json(self):
        return json.dumps({'model': self.model, 'k_values': list(self.k_values), 'per_k': self.per_k},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text):
        raw = json.loads(text)
        return cls(raw['model'], [float(k) for k in raw['k_values']], raw['per_k'])


def density_sweep(spec, dataset, k_values, runs, config=TrainConfig(), split_spec=SplitSpec(),
                  master_seed=0, arrays=None, name=None):
    """Trains `spec` at every density in `k_values` for `runs` seeded runs.

    The sign mode follows `spec.family`; every run redraws the split
    (unless `split_spec.fixed`) and reinitializes the model.
    """
    k_values = [float(k) for k in k_values]
    if not k_values:
        raise ValueError('density sweep needs at least one K value')
    if runs < 1:
        raise ValueError('runs must be >= 1, got %r' % (runs,))
    arrays = ConnectomeArrays.from_dataset(dataset) if arrays is None else arrays
    result = SweepResult(name or spec.family, k_values)
    metrics = {k: [] for k in k_values}

    for run in range(runs):
        split_seed = run_seeds(master_seed, 0 if split_spec.fixed else run)[0]
        init_seed = run_seeds(master_seed, run)[1]
        splits = split_indices(len(arrays), split_spec.with_seed(split_seed))
        train, val, test = splits.arrays(arrays)
        for k in k_values:
            run_spec = spec.replace(density=k, seed=init_seed)
            model = build_graph_net(run_spec, arrays.n_roi, arrays.task.n_outputs)
            trainer, _ = fit_model(model, train, val, config.replace(seed=init_seed))
            metric = evaluate(trainer.predict(model.feed(test)), test.targets, arrays.task)
            metrics[k].append(metric)
            logger.info('sweep %s run %d K=%g: test %s %.4f', result.model, run, k,
                        arrays.task.selection_metric, metric)

    for k in k_values:
        result.record(k, metrics[k])
    logger.info('sweep %s trend (Spearman K vs metric): %.3f', result.model, result.monotone_trend())
    return result
