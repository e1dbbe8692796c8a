#!/usr/bin/env python
"""Manifest + CSV dataset layout.

A manifest is one JSON file::

    {"task": "binary_classification", "atlas": "toy50",
     "subjects": [{"id": "sub-000", "series_file": "series/sub-000.csv", "target": 1}, ...]}

Series files are headerless CSV, row i = ROI i, column j = time point j.
Relative `series_file` paths resolve against the manifest's directory.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os

import numpy as np

from brainbench.connectome import TimeSeriesMatrix
from brainbench.data_io.dataset import Dataset, Subject, Task

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'
SERIES_DIR = 'series'


def _parse_target(raw, task, subject_id):
    if raw is None:
        raise ValueError('subject %s: missing target' % subject_id)
    if isinstance(raw, bool):
        raise ValueError('subject %s: target %r is not numeric' % (subject_id, raw))
    try:
        target = float(raw)
    except (TypeError, ValueError):
        raise ValueError('subject %s: target %r is not numeric' % (subject_id, raw))
    if not math.isfinite(target):
        raise ValueError('subject %s: target %r is not finite' % (subject_id, raw))
    if task.is_classification and target not in (0.0, 1.0):
        raise ValueError('subject %s: classification target must be 0 or 1, got %r'
                         % (subject_id, raw))
    return target


def _read_series(path, subject_id):
    rows = []
    with open(path) as sfile:
        for line_no, row in enumerate(csv.reader(sfile)):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ValueError('subject %s: non-numeric value in %s line %d'
                                 % (subject_id, path, line_no + 1))
    if len({len(r) for r in rows}) > 1:
        raise ValueError('subject %s: ragged rows in %s' % (subject_id, path))
    return np.array(rows, dtype=np.float64)


def load_dataset(manifest_path):
    """Reads a manifest and its series files into a validated Dataset.

    Subjects keep manifest order. Shape mismatches, missing files and bad
    targets are rejected with the subject id in the message.
    """
    if not os.path.isfile(manifest_path):
        raise FileNotFoundError('%s is not a file' % manifest_path)
    with open(manifest_path) as mfile:
        manifest = json.load(mfile)

    try:
        task = Task(manifest.get('task'))
    except ValueError:
        raise ValueError('%s: unknown task %r' % (manifest_path, manifest.get('task')))
    base = os.path.dirname(os.path.abspath(manifest_path))

    subjects = []
    shape = None
    for entry in manifest.get('subjects', []):
        subject_id = str(entry.get('id'))
        target = _parse_target(entry.get('target'), task, subject_id)
        series_file = entry.get('series_file')
        if not series_file:
            raise ValueError('subject %s: no series_file' % subject_id)
        path = series_file if os.path.isabs(series_file) else os.path.join(base, series_file)
        if not os.path.isfile(path):
            raise FileNotFoundError('subject %s: series file %s not found' % (subject_id, path))
        values = _read_series(path, subject_id)
        if shape is not None and values.shape != shape:
            raise ValueError('subject %s: series shape %s differs from %s'
                             % (subject_id, values.shape, shape))
        shape = values.shape
        try:
            bold = TimeSeriesMatrix(values)
        except ValueError as e:
            raise ValueError('subject %s: %s' % (subject_id, e))
        subjects.append(Subject(subject_id, bold, target))

    planted = tuple(tuple(int(v) for v in pair) for pair in manifest.get('planted_edges', []))
    dataset = Dataset(tuple(subjects), task, manifest.get('atlas', 'unknown'), planted)
    logger.info('Loaded %d subjects (%d ROIs x %d points) from %s',
                len(dataset), dataset.n_roi, dataset.series_length, manifest_path)
    return dataset


def write_dataset(dataset, out_dir):
    """Writes `dataset` in the manifest + CSV layout read by `load_dataset`."""
    series_dir = os.path.join(out_dir, SERIES_DIR)
    if not os.path.exists(series_dir):
        os.makedirs(series_dir)

    entries = []
    for subject in dataset.subjects:
        fname = os.path.join(SERIES_DIR, subject.subject_id + '.csv')
        with open(os.path.join(out_dir, fname), 'w', newline='') as sfile:
            writer = csv.writer(sfile)
            for row in subject.bold.values:
                writer.writerow([repr(float(v)) for v in row])
        target = int(subject.target) if dataset.task.is_classification else subject.target
        entries.append({'id': subject.subject_id, 'series_file': fname, 'target': target})

    manifest = {'task': dataset.task.value, 'atlas': dataset.atlas_name, 'subjects': entries}
    if dataset.planted_edges:
        manifest['planted_edges'] = [list(p) for p in dataset.planted_edges]
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    with open(manifest_path, 'w') as mfile:
        json.dump(manifest, mfile, indent=2)
    logger.info('Dataset of %d subjects written to %s', len(dataset), manifest_path)
    return manifest_path


def truncate_series(bold, length):
    """First `length` time points of `bold`; shorter series are rejected."""
    if length < 2:
        raise ValueError('truncation length must be >= 2, got %d' % length)
    if bold.length < length:
        raise ValueError('series of length %d is shorter than the requested %d (no padding)'
                         % (bold.length, length))
    return TimeSeriesMatrix(bold.values[:, :length], bold.roi_labels)


def truncate_dataset(dataset, length):
    subjects = []
    for s in dataset.subjects:
        try:
            subjects.append(Subject(s.subject_id, truncate_series(s.bold, length), s.target))
        except ValueError as e:
            raise ValueError('subject %s: %s' % (s.subject_id, e))
    return Dataset(tuple(subjects), dataset.task, dataset.atlas_name, dataset.planted_edges)
