"""Experiment configuration: YAML (or JSON) files validated into frozen dataclasses."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import yaml

from brainbench.bench.conf import DEFAULT_GRIDS, SWEEP_DENSITIES
from brainbench.bench.errors import ConfigError
from brainbench.bench.models import GNN_KINDS, MODEL_KINDS, PARAM_KEYS
from brainbench.data_io import SplitSpec, SyntheticConfig, generate_synthetic, load_dataset
from brainbench.graph_models import TrainConfig
from brainbench.interpret import NullConfig

logger = logging.getLogger(__name__)

METRICS = ('auroc', 'pearson_r')


@dataclass(frozen=True)
class ModelConfig:
    name: str
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)
    grid: Dict[str, list] = field(default_factory=dict)

    def to_dict(self):
        return {'name': self.name, 'kind': self.kind, 'params': dict(self.params),
                'grid': {k: list(v) for k, v in self.grid.items()}}


@dataclass(frozen=True)
class DatasetSource:
    manifest: Optional[str] = None
    synthetic: Optional[SyntheticConfig] = None
    base_dir: str = '.'

    def load(self):
        if self.manifest is not None:
            path = self.manifest if os.path.isabs(self.manifest) else os.path.join(self.base_dir, self.manifest)
            return load_dataset(path)
        return generate_synthetic(self.synthetic)

    def to_dict(self):
        if self.manifest is not None:
            return {'manifest': self.manifest}
        values = dataclasses.asdict(self.synthetic)
        values['task'] = self.synthetic.task.value
        return {'synthetic': values}


@dataclass(frozen=True)
class SweepConfig:
    models: Tuple[str, ...] = ()
    k_values: Tuple[float, ...] = tuple(SWEEP_DENSITIES)


@dataclass(frozen=True)
class InterpretConfig:
    atlas: Optional[str] = None
    top_fraction: float = 0.1
    subgraph_fraction: float = 5.0
    louvain_seed: int = 0
    null: NullConfig = field(default_factory=NullConfig)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSource
    models: Tuple[ModelConfig, ...]
    split: SplitSpec = field(default_factory=SplitSpec)
    runs: int = 10
    train: TrainConfig = field(default_factory=TrainConfig)
    metrics: Tuple[str, ...] = ()
    output_dir: str = 'results'
    master_seed: int = 0
    per_run_grid: bool = False
    workers: int = 1
    sweep: SweepConfig = field(default_factory=SweepConfig)
    interpret: InterpretConfig = field(default_factory=InterpretConfig)

    def model(self, name):
        for model in self.models:
            if model.name == name:
                return model
        raise ConfigError('no model named %r in the configuration' % (name,))

    def override(self, seed=None, runs=None, out=None, workers=None, per_run_grid=None):
        """Copy with command-line values applied over the file values."""
        changes = {}
        if seed is not None:
            changes['master_seed'] = seed
        if runs is not None:
            if runs < 1:
                raise ConfigError('runs must be >= 1, got %d' % runs)
            changes['runs'] = runs
        if out is not None:
            changes['output_dir'] = out
        if workers is not None:
            changes['workers'] = workers
        if per_run_grid:
            changes['per_run_grid'] = True
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        split = dataclasses.asdict(self.split)
        del split['seed']
        train = dataclasses.asdict(self.train)
        del train['seed']
        return {
            'dataset': self.dataset.to_dict(),
            'models': [m.to_dict() for m in self.models],
            'split': split,
            'runs': self.runs,
            'train': train,
            'metrics': list(self.metrics),
            'master_seed': self.master_seed,
            'per_run_grid': self.per_run_grid,
            'sweep': {'models': list(self.sweep.models), 'k_values': list(self.sweep.k_values)},
        }

    def config_hash(self):
        """sha256 of the canonical JSON of everything that determines results."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def _section(raw, key, cls, **extra):
    values = raw.get(key) or {}
    if not isinstance(values, dict):
        raise ConfigError('%s must be a mapping' % key)
    try:
        return cls(**dict(values, **extra))
    except (TypeError, ValueError) as e:
        raise ConfigError('invalid %s section: %s' % (key, e))


def _parse_model(raw, index):
    if not isinstance(raw, dict) or 'kind' not in raw:
        raise ConfigError('model #%d needs a kind' % index)
    kind = raw['kind']
    name = str(raw.get('name', kind))
    if kind not in MODEL_KINDS:
        raise ConfigError('model %r: unknown kind %r (expected one of %s)' % (name, kind, ', '.join(MODEL_KINDS)))
    params = dict(raw.get('params') or {})
    if 'grid' in raw:
        grid = raw['grid'] or {}
        if not grid:
            raise ConfigError('model %r: grid is empty' % name)
    else:
        grid = {k: v for k, v in DEFAULT_GRIDS[kind].items() if k not in params}
    for key, values in grid.items():
        if not isinstance(values, list) or not values:
            raise ConfigError('model %r: grid key %r needs a nonempty list of values' % (name, key))
    unknown = sorted((set(params) | set(grid)) - set(PARAM_KEYS[kind]))
    if unknown:
        raise ConfigError('model %r: unknown hyperparameters %s for kind %s' % (name, unknown, kind))
    both = sorted(set(params) & set(grid))
    if both:
        raise ConfigError('model %r: %s given both as params and grid' % (name, both))
    return ModelConfig(name, kind, params, {k: list(v) for k, v in grid.items()})


def parse_config(raw, base_dir='.'):
    """Validates a configuration mapping into an ExperimentConfig."""
    if not isinstance(raw, dict):
        raise ConfigError('configuration must be a mapping')
    source = raw.get('dataset') or {}
    if 'manifest' in source:
        dataset = DatasetSource(manifest=str(source['manifest']), base_dir=base_dir)
    else:
        dataset = DatasetSource(synthetic=_section(source, 'synthetic', SyntheticConfig), base_dir=base_dir)

    models = tuple(_parse_model(m, i) for i, m in enumerate(raw.get('models') or []))
    if not models:
        raise ConfigError('configuration lists no models')
    names = [m.name for m in models]
    if len(set(names)) != len(names):
        raise ConfigError('model names must be unique, got %s' % names)

    runs = int(raw.get('runs', 10))
    if runs < 1:
        raise ConfigError('runs must be >= 1, got %d' % runs)
    metrics = tuple(raw.get('metrics') or ())
    if set(metrics) - set(METRICS):
        raise ConfigError('unknown metrics %s' % sorted(set(metrics) - set(METRICS)))

    sweep_raw = raw.get('sweep') or {}
    sweep = SweepConfig(tuple(sweep_raw.get('models') or ()),
                        tuple(float(k) for k in sweep_raw.get('k_values', SWEEP_DENSITIES)))
    for name in sweep.models:
        if name not in names:
            raise ConfigError('sweep model %r is not configured' % name)
        model = next(m for m in models if m.name == name)
        if model.kind not in GNN_KINDS:
            raise ConfigError('sweep model %r must be a graph model, got %s' % (name, model.kind))

    interpret_raw = dict(raw.get('interpret') or {})
    null = _section(interpret_raw, 'null', NullConfig)
    interpret_raw.pop('null', None)
    interpret = _section({'interpret': interpret_raw}, 'interpret', InterpretConfig, null=null)

    return ExperimentConfig(
        dataset=dataset,
        models=models,
        split=_section(raw, 'split', SplitSpec),
        runs=runs,
        train=_section(raw, 'train', TrainConfig),
        metrics=metrics,
        output_dir=str(raw.get('output_dir', 'results')),
        master_seed=int(raw.get('master_seed', 0)),
        per_run_grid=bool(raw.get('per_run_grid', False)),
        workers=int(raw.get('workers', 1)),
        sweep=sweep,
        interpret=interpret,
    )


def load_config(path):
    if not os.path.exists(path):
        raise ConfigError('configuration file not found: %s' % path)
    with open(path) as f:
        try:
            raw = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError('%s: %s' % (path, e))
    config = parse_config(raw, base_dir=os.path.dirname(os.path.abspath(path)))
    logger.info('loaded %s: %d models, %d runs, master seed %d', path, len(config.models), config.runs,
                config.master_seed)
    return config
