"""Multi-run benchmark: grid search, seeded runs per model, summary table."""
from __future__ import annotations

import itertools
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from joblib import Parallel, delayed

from brainbench.bench.errors import ConfigError, RunFailure
from brainbench.bench.grid import grid_search
from brainbench.bench.models import run_cell, supports
from brainbench.bench.stats import TEST_NAME, significance_test
from brainbench.data_io import ConnectomeArrays, split_indices
from brainbench.graph_models import TrainingDiverged, run_seeds

logger = logging.getLogger(__name__)

RUN_ERRORS = (ValueError, ArithmeticError, RuntimeError, RunFailure)


def _finite_or_none(x):
    return None if x is None or not np.isfinite(x) else float(x)


@dataclass
class RunResult:
    model: str
    run: int
    split_seed: int
    init_seed: int
    test_metric: Optional[float]
    val_metric: Optional[float] = None
    best_epoch: Optional[int] = None
    hyperparameters: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None

    def to_dict(self):
        values = asdict(self)
        values['val_metric'] = _finite_or_none(self.val_metric)
        values['test_metric'] = _finite_or_none(self.test_metric)
        return values


@dataclass
class ModelSummary:
    name: str
    kind: str
    runs: List[RunResult]

    @property
    def metrics(self):
        return [r.test_metric for r in self.runs if r.ok]

    @property
    def failed(self):
        return any(not r.ok for r in self.runs)

    @property
    def mean(self):
        return float(np.mean(self.metrics)) if self.metrics else float('nan')

    @property
    def std(self):
        return float(np.std(self.metrics)) if self.metrics else float('nan')

    def to_dict(self):
        return {'name': self.name, 'kind': self.kind, 'mean': _finite_or_none(self.mean),
                'std': _finite_or_none(self.std), 'failed': self.failed,
                'runs': [r.to_dict() for r in self.runs]}


@dataclass
class ResultTable:
    task: str
    metric: str
    models: Dict[str, ModelSummary] = field(default_factory=dict)
    pvalues: Dict[str, float] = field(default_factory=dict)
    master_seed: int = 0
    config_hash: str = ''

    @property
    def failed_models(self):
        return [name for name, summary in self.models.items() if summary.failed]

    def pvalue(self, a, b):
        key = '%s|%s' % (a, b) if '%s|%s' % (a, b) in self.pvalues else '%s|%s' % (b, a)
        return self.pvalues[key]

    def compute_pvalues(self):
        self.pvalues = {}
        for a, b in itertools.combinations(self.models, 2):
            runs_a, runs_b = self.models[a].metrics, self.models[b].metrics
            if len(runs_a) >= 2 and len(runs_b) >= 2:
                self.pvalues['%s|%s' % (a, b)] = significance_test(runs_a, runs_b)

    def best_baseline(self):
        """Name of the non-dual model with the highest mean test metric."""
        candidates = [(s.mean, name) for name, s in self.models.items() if s.kind != 'dual' and s.metrics]
        if not candidates:
            return None
        # first listed model wins ties
        return max(candidates, key=lambda c: (c[0], -list(self.models).index(c[1])))[1]

    def to_dict(self):
        return {'task': self.task, 'metric': self.metric, 'master_seed': self.master_seed,
                'config_hash': self.config_hash, 'significance_test': TEST_NAME,
                'best_baseline': self.best_baseline(),
                'models': [s.to_dict() for s in self.models.values()],
                'pvalues': dict(sorted(self.pvalues.items()))}

    @classmethod
    def from_dict(cls, raw):
        table = cls(raw['task'], raw['metric'], master_seed=raw['master_seed'], config_hash=raw['config_hash'])
        for entry in raw['models']:
            runs = [RunResult(**dict(r, test_metric=r['test_metric'] if r['test_metric'] is not None
                                     else float('nan'))) for r in entry['runs']]
            table.models[entry['name']] = ModelSummary(entry['name'], entry['kind'], runs)
        table.pvalues = dict(raw.get('pvalues', {}))
        return table

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def run_split(arrays, split_spec, master_seed, run):
    """(train, val, test, split seed, init seed) of one run."""
    split_seed = run_seeds(master_seed, 0 if split_spec.fixed else run)[0]
    init_seed = run_seeds(master_seed, run)[1]
    train, val, test = split_indices(len(arrays), split_spec.with_seed(split_seed)).arrays(arrays)
    return train, val, test, split_seed, init_seed


def _run_one(model, params, arrays, config, run):
    train, val, test, split_seed, init_seed = run_split(arrays, config.split, config.master_seed, run)
    result = RunResult(model.name, run, split_seed, init_seed, None)
    try:
        if params is None:
            params = grid_search(model, train, val, config.train, init_seed).best_params
        cell = run_cell(model.kind, params, train, val, test, config.train, init_seed)
    except TrainingDiverged as e:
        result.error = 'diverged after %d epochs: %s' % (len(e.history), e)
    except RUN_ERRORS as e:
        result.error = '%s: %s' % (type(e).__name__, e)
    else:
        result.val_metric, result.test_metric, result.best_epoch = cell.val_metric, cell.test_metric, cell.best_epoch
    result.hyperparameters = dict(params or {})
    if result.ok and not np.isfinite(result.test_metric):
        result.error = 'non-finite test metric'
    if result.ok:
        logger.info('%s run %d: test %.4f', model.name, run, result.test_metric)
    else:
        logger.error('%s run %d failed: %s', model.name, run, result.error)
    return result


def run_benchmark(config, dataset=None, arrays=None):
    """Runs every configured model for `config.runs` seeded runs; returns a ResultTable.

    Grid search runs once on the run-0 split unless `config.per_run_grid`.
    (model, run) cells go to `config.workers` processes and are merged by
    (model, run), so the table does not depend on the worker count.
    """
    if arrays is None:
        arrays = ConnectomeArrays.from_dataset(dataset if dataset is not None else config.dataset.load())
    task = arrays.task
    for model in config.models:
        if not supports(model.kind, task):
            raise ConfigError('model %s (%s) does not support task %s' % (model.name, model.kind, task.value))

    chosen, failures = {}, {}
    if not config.per_run_grid:
        train, val, _, _, init_seed = run_split(arrays, config.split, config.master_seed, 0)
        for model in config.models:
            try:
                chosen[model.name] = grid_search(model, train, val, config.train, init_seed).best_params
            except RunFailure as e:
                logger.error('%s', e)
                failures[model.name] = str(e)

    cells = [(model, run) for model in config.models for run in range(config.runs)
             if model.name not in failures]
    results = Parallel(n_jobs=config.workers)(
        delayed(_run_one)(model, chosen.get(model.name), arrays, config, run) for model, run in cells)
    by_key = {(r.model, r.run): r for r in results}
    for name, message in failures.items():
        for run in range(config.runs):
            split_seed = run_seeds(config.master_seed, 0 if config.split.fixed else run)[0]
            by_key[(name, run)] = RunResult(name, run, split_seed, run_seeds(config.master_seed, run)[1], None,
                                            error=message)

    table = ResultTable(task.value, task.selection_metric, master_seed=config.master_seed,
                        config_hash=config.config_hash())
    for model in config.models:
        runs = [by_key[(model.name, run)] for run in range(config.runs)]
        table.models[model.name] = ModelSummary(model.name, model.kind, runs)
        summary = table.models[model.name]
        logger.info('%s: %s %.4f +- %.4f over %d runs%s', model.name, table.metric, summary.mean, summary.std,
                    len(summary.metrics), ' (FAILED runs)' if summary.failed else '')
    table.compute_pvalues()
    return table
