"""HDF5 checkpoints of trained dual-pathway models.

Layout: root attributes `format_version` and `spec` (JSON with the model
spec, n_roi, series_length and task), dataset `parameters` holding every
weight array flattened in `model.get_weights()` order as float64, and the
JSON attribute `shapes` listing the shape of each array in that order.
"""
from __future__ import annotations

import json
import logging
import os

import h5py
import numpy as np

from brainbench.data_io import Task
from brainbench.dual_pathway.model import DualSpec, build_dual_model

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def save_checkpoint(model, path):
    weights = model.get_weights()
    header = {'model': model.spec.to_dict(), 'n_roi': model.n_roi,
              'series_length': model.series_length, 'task': model.task.value}
    blob = np.concatenate([np.asarray(w, dtype=np.float64).ravel() for w in weights])
    with h5py.File(path, 'w') as f:
        f.attrs['format_version'] = FORMAT_VERSION
        f.attrs['spec'] = json.dumps(header, sort_keys=True)
        f.attrs['shapes'] = json.dumps([list(w.shape) for w in weights])
        f.create_dataset('parameters', data=blob)
    logger.info('saved checkpoint %s (%d parameters)', path, blob.size)
    return path


def load_checkpoint(path):
    """Rebuilds the model stored at `path` with its trained weights."""
    if not os.path.exists(path):
        raise FileNotFoundError('checkpoint not found: %s' % path)
    with h5py.File(path, 'r') as f:
        version = int(f.attrs['format_version'])
        if version != FORMAT_VERSION:
            raise ValueError('%s: unsupported checkpoint format %d (expected %d)'
                             % (path, version, FORMAT_VERSION))
        header = json.loads(f.attrs['spec'])
        shapes = json.loads(f.attrs['shapes'])
        blob = np.array(f['parameters'], dtype=np.float64)

    model = build_dual_model(DualSpec.from_dict(header['model']), header['n_roi'],
                             header['series_length'], Task(header['task']))
    sizes = [int(np.prod(s)) for s in shapes]
    if sum(sizes) != blob.size:
        raise ValueError('%s: parameter blob holds %d values, shapes need %d' % (path, blob.size, sum(sizes)))
    offsets = np.cumsum([0] + sizes)
    model.set_weights([blob[a:b].reshape(s) for a, b, s in zip(offsets[:-1], offsets[1:], shapes)])
    return model
