"""Command line: synth, bench, sweep, train-dual, interpret, report.

Exit codes: 0 success, 2 configuration error, 3 run failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import glob
import json
import logging
import os
import sys

from brainbench.bench.config import load_config
from brainbench.bench.errors import BenchError, ConfigError, RunFailure
from brainbench.bench.grid import grid_search
from brainbench.bench.models import dual_spec, gnn_spec, train_config_for
from brainbench.bench.report import INTERPRET_DIR, RESULTS_JSON, emit_report, write_sweep_csv
from brainbench.bench.runner import ResultTable, run_benchmark, run_split
from brainbench.data_io import ConnectomeArrays, SyntheticConfig, generate_synthetic, write_dataset
from brainbench.dual_pathway import build_dual_model, load_checkpoint, phased_train, save_checkpoint
from brainbench.graph_models import SweepResult, TrainingDiverged, density_sweep
from brainbench.interpret import interpret_model, load_atlas, write_bundle

logger = logging.getLogger('brainbench')

CHECKPOINT_NAME = 'dual.h5'
SWEEP_DIR = 'sweeps'


def _config(args, required=True):
    if args.config is None:
        if required:
            raise ConfigError('%s needs --config' % args.command)
        return None
    return load_config(args.config).override(seed=args.seed, runs=args.runs, out=args.out,
                                             workers=args.workers, per_run_grid=args.per_run_grid)


def _provenance(config):
    return {'config_hash': config.config_hash(), 'master_seed': config.master_seed}


def _arrays(config):
    return ConnectomeArrays.from_dataset(config.dataset.load())


def cmd_synth(args):
    config = _config(args, required=False)
    synthetic = SyntheticConfig()
    if config is not None and config.dataset.synthetic is not None:
        synthetic = config.dataset.synthetic
    if args.seed is not None:
        synthetic = dataclasses.replace(synthetic, seed=args.seed)
    out = args.out or 'synthetic'
    manifest = write_dataset(generate_synthetic(synthetic), out)
    logger.info('synthetic dataset written to %s', manifest)
    return 0


def cmd_bench(args):
    config = _config(args)
    table = run_benchmark(config)
    emit_report(table, None, None, config.output_dir)
    if table.failed_models:
        logger.error('runs failed for %s', ', '.join(table.failed_models))
        return RunFailure.exit_code
    logger.info('best baseline: %s', table.best_baseline())
    return 0


def _chosen_params(config, model, arrays):
    train, val, _, _, init_seed = run_split(arrays, config.split, config.master_seed, 0)
    return grid_search(model, train, val, config.train, init_seed).best_params


def cmd_sweep(args):
    config = _config(args)
    if not config.sweep.models:
        raise ConfigError('sweep section lists no models')
    arrays = _arrays(config)
    os.makedirs(os.path.join(config.output_dir, SWEEP_DIR), exist_ok=True)
    sweeps = []
    for name in config.sweep.models:
        model = config.model(name)
        params = _chosen_params(config, model, arrays)
        train_config = train_config_for(config.train, params, 0)
        result = density_sweep(gnn_spec(model.kind, params, 0), None, config.sweep.k_values, config.runs,
                               config=train_config, split_spec=config.split, master_seed=config.master_seed,
                               arrays=arrays, name=name)
        with open(os.path.join(config.output_dir, SWEEP_DIR, '%s.json' % name), 'w') as f:
            f.write(result.to_json())
        sweeps.append(result)
    write_sweep_csv(os.path.join(config.output_dir, 'density_sweep.csv'), sweeps, _provenance(config))
    return 0


def cmd_train_dual(args):
    config = _config(args)
    duals = [m for m in config.models if m.kind == 'dual']
    if not duals:
        raise ConfigError('train-dual needs a model of kind dual')
    arrays = _arrays(config)
    params = _chosen_params(config, duals[0], arrays)
    train, val, test, split_seed, init_seed = run_split(arrays, config.split, config.master_seed, 0)
    model = build_dual_model(dual_spec(params, init_seed), arrays.n_roi, arrays.bold.shape[-1], arrays.task)
    train_config = train_config_for(config.train, params, init_seed)
    _, history = phased_train(model, train, val, train_config, params.get('phase1_epochs', 10))
    os.makedirs(config.output_dir, exist_ok=True)
    save_checkpoint(model, os.path.join(config.output_dir, CHECKPOINT_NAME))
    summary = dict(_provenance(config), hyperparameters=params, split_seed=split_seed,
                   history=history.to_dict(), test_subjects=list(test.subject_ids))
    with open(os.path.join(config.output_dir, 'dual_training.json'), 'w') as f:
        json.dump(summary, f, indent=2, sort_keys=True, default=float)
    return 0


def cmd_interpret(args):
    config = _config(args)
    checkpoint = args.checkpoint or os.path.join(config.output_dir, CHECKPOINT_NAME)
    model = load_checkpoint(checkpoint)
    _, _, test, _, _ = run_split(_arrays(config), config.split, config.master_seed, 0)
    settings = config.interpret
    atlas = None
    if settings.atlas is not None:
        atlas = load_atlas(settings.atlas if os.path.isabs(settings.atlas)
                           else os.path.join(config.dataset.base_dir, settings.atlas))
    bundle = interpret_model(model, test, atlas, top_fraction=settings.top_fraction,
                             subgraph_fraction=settings.subgraph_fraction, null_config=settings.null,
                             louvain_seed=settings.louvain_seed)
    bundle.metadata['checkpoint'] = os.path.basename(checkpoint)
    write_bundle(bundle, os.path.join(config.output_dir, INTERPRET_DIR, 'dual'), _provenance(config))
    return 0


def cmd_report(args):
    out = args.out or 'results'
    source = args.source or out
    table = None
    path = os.path.join(source, RESULTS_JSON)
    if os.path.exists(path):
        with open(path) as f:
            table = ResultTable.from_dict(json.load(f))
    sweeps = []
    for sweep_path in sorted(glob.glob(os.path.join(source, SWEEP_DIR, '*.json'))):
        with open(sweep_path) as f:
            sweeps.append(SweepResult.from_json(f.read()))
    bundles = {os.path.basename(d): d for d in sorted(glob.glob(os.path.join(source, INTERPRET_DIR, '*')))
               if os.path.isdir(d)}
    config = _config(args, required=False)
    provenance = _provenance(config) if config is not None else {}
    emit_report(table, sweeps, bundles, out, **provenance)
    return 0


COMMANDS = {
    'synth': (cmd_synth, 'write a synthetic dataset'),
    'bench': (cmd_bench, 'run the multi-model benchmark'),
    'sweep': (cmd_sweep, 'graph-density sweep of the configured graph models'),
    'train-dual': (cmd_train_dual, 'phased training of the dual-pathway model plus checkpoint'),
    'interpret': (cmd_interpret, 'interpretation bundle from a dual-pathway checkpoint'),
    'report': (cmd_report, 'collect results, sweeps and bundles into a report directory'),
}


def build_parser():
    parser = argparse.ArgumentParser(prog='brainbench', description='Connectome prediction benchmarks')
    sub = parser.add_subparsers(dest='command', required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument('--config', help='experiment YAML/JSON file')
        p.add_argument('--seed', type=int, help='master seed (synthetic seed for synth)')
        p.add_argument('--out', help='output directory')
        p.add_argument('--runs', type=int, help='number of seeded runs')
        p.add_argument('--workers', type=int, help='worker processes for (model, run) cells')
        p.add_argument('--per-run-grid', action='store_true', help='grid search on every run, not run 0 only')
        p.add_argument('--verbose', action='store_true', help='debug logging')
        if name == 'interpret':
            p.add_argument('--checkpoint', help='dual-pathway checkpoint (default <out>/%s)' % CHECKPOINT_NAME)
        if name == 'report':
            p.add_argument('--from', dest='source', help='directory holding results, sweeps and bundles')
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='[%(levelname)s] [%(name)s]: %(message)s')
    handler, _ = COMMANDS[args.command]
    try:
        return handler(args)
    except BenchError as e:
        logger.error('%s', e)
        return e.exit_code
    except (FileNotFoundError, ValueError) as e:
        logger.error('%s: %s', args.command, e)
        return ConfigError.exit_code
    except TrainingDiverged as e:
        logger.error('training diverged: %s', e)
        return RunFailure.exit_code


if __name__ == '__main__':
    sys.exit(main())
