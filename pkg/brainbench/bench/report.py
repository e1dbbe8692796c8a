"""Result files: results.json, results.csv, density_sweep.csv and copied interpretation bundles.

Every file carries the configuration hash and master seed; CSV files in a
leading `#` comment line. The `timestamp` field of results.json is the only
value that changes between identical reruns.
"""
from __future__ import annotations

import csv
import datetime
import json
import logging
import os
import shutil

logger = logging.getLogger(__name__)

RESULTS_JSON = 'results.json'
RESULTS_CSV = 'results.csv'
SWEEP_CSV = 'density_sweep.csv'
INTERPRET_DIR = 'interpret'


def _open(path, mode='w'):
    try:
        return open(path, mode, newline='')
    except OSError as e:
        raise OSError('cannot write %s: %s' % (path, e.strerror or e)) from e


def _write_csv(path, provenance, header, rows):
    with _open(path) as f:
        f.write('# config_hash=%s master_seed=%s\n' % (provenance['config_hash'], provenance['master_seed']))
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_sweep_csv(path, sweeps, provenance):
    """(model, K, mean, std) rows, sweep after sweep in K order."""
    rows = [(model, '%g' % k, repr(mean), repr(std)) for sweep in sweeps for model, k, mean, std in sweep.rows()]
    return _write_csv(path, provenance, ['model', 'K', 'mean', 'std'], rows)


def emit_report(table, sweeps, bundles, out_dir, config_hash=None, master_seed=None):
    """Writes the report files into `out_dir`; returns the written paths.

    `bundles` maps a bundle name to a directory written by
    `brainbench.interpret.write_bundle`; each is copied under interpret/<name>.
    A `sweeps` of None leaves density_sweep.csv untouched; an empty list
    writes the header only.
    """
    provenance = {'config_hash': config_hash if config_hash is not None else getattr(table, 'config_hash', ''),
                  'master_seed': master_seed if master_seed is not None else getattr(table, 'master_seed', 0)}
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise OSError('cannot create output directory %s: %s' % (out_dir, e)) from e
    written = []

    if table is not None:
        path = os.path.join(out_dir, RESULTS_JSON)
        body = dict(table.to_dict(), **provenance)
        body['timestamp'] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        with _open(path) as f:
            json.dump(body, f, indent=2, sort_keys=True)
            f.write('\n')
        written.append(path)
        rows = [(name, repr(s.mean), repr(s.std), len(s.metrics), int(s.failed)) for name, s in table.models.items()]
        written.append(_write_csv(os.path.join(out_dir, RESULTS_CSV), provenance,
                                  ['model', 'mean', 'std', 'n_runs', 'failed'], rows))

    if sweeps is not None:
        written.append(write_sweep_csv(os.path.join(out_dir, SWEEP_CSV), list(sweeps), provenance))

    for name, source in sorted((bundles or {}).items()):
        target = os.path.join(out_dir, INTERPRET_DIR, name)
        if os.path.abspath(source) != os.path.abspath(target):
            shutil.copytree(source, target, dirs_exist_ok=True)
        written.append(target)
    logger.info('report written to %s (%d entries)', out_dir, len(written))
    return written
