"""Subjects, datasets and the per-dataset array cache shared by all models."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from brainbench.connectome import TimeSeriesMatrix, pearson_connectivity_batch, vectorize_batch

logger = logging.getLogger(__name__)


class Task(str, enum.Enum):
    BINARY_CLASSIFICATION = 'binary_classification'
    REGRESSION = 'regression'

    @property
    def is_classification(self):
        return self is Task.BINARY_CLASSIFICATION

    @property
    def n_outputs(self):
        return 2 if self.is_classification else 1

    @property
    def selection_metric(self):
        return 'auroc' if self.is_classification else 'pearson_r'


@dataclass(frozen=True)
class Subject:
    subject_id: str
    bold: TimeSeriesMatrix
    target: float

    def __post_init__(self):
        if not math.isfinite(float(self.target)):
            raise ValueError('subject %s: target must be finite' % self.subject_id)
        object.__setattr__(self, 'target', float(self.target))


@dataclass(frozen=True)
class Dataset:
    subjects: Tuple[Subject, ...]
    task: Task
    atlas_name: str = 'unknown'
    planted_edges: Tuple[Tuple[int, int], ...] = field(default=(), repr=False)
    allow_small: bool = field(default=False, repr=False)

    def __post_init__(self):
        subjects = tuple(self.subjects)
        task = Task(self.task)
        object.__setattr__(self, 'subjects', subjects)
        object.__setattr__(self, 'task', task)
        if not subjects:
            raise ValueError('dataset holds no subjects')
        if len(subjects) < 2 and not self.allow_small:
            raise ValueError('dataset needs at least 2 subjects, got %d' % len(subjects))
        shape = subjects[0].bold.values.shape
        for s in subjects:
            if s.bold.values.shape != shape:
                raise ValueError('subject %s: series shape %s differs from %s'
                                 % (s.subject_id, s.bold.values.shape, shape))
            if task.is_classification and s.target not in (0.0, 1.0):
                raise ValueError('subject %s: classification target must be 0 or 1, got %r'
                                 % (s.subject_id, s.target))
        if task.is_classification and not self.allow_small and len(set(self.targets)) < 2:
            raise ValueError('classification dataset needs both classes present')

    def __len__(self):
        return len(self.subjects)

    @property
    def n_roi(self):
        return self.subjects[0].bold.n_roi

    @property
    def series_length(self):
        return self.subjects[0].bold.length

    @property
    def roi_labels(self):
        return self.subjects[0].bold.roi_labels

    @property
    def subject_ids(self):
        return [s.subject_id for s in self.subjects]

    @property
    def targets(self):
        return np.array([s.target for s in self.subjects], dtype=np.float64)

    @property
    def series(self):
        return np.stack([s.bold.values for s in self.subjects])

    def subset(self, indices: Sequence[int]):
        """Dataset over `indices`; may hold a single class or subject."""
        return Dataset(tuple(self.subjects[i] for i in indices), self.task, self.atlas_name,
                       self.planted_edges, allow_small=True)


def zscore_rows(series):
    """Per-ROI z-scoring of a (..., n_roi, t) array; flat rows map to zeros."""
    series = np.asarray(series, dtype=np.float64)
    mean = series.mean(axis=-1, keepdims=True)
    std = series.std(axis=-1, keepdims=True)
    safe = np.where(std > 0, std, 1.0)
    return np.where(std > 0, (series - mean) / safe, 0.0)


@dataclass
class ConnectomeArrays:
    """Connectivity, u vectors and z-scored BOLD computed once per dataset."""

    connectivity: np.ndarray
    vectors: np.ndarray
    bold: np.ndarray
    targets: np.ndarray
    subject_ids: List[str]
    task: Task

    @classmethod
    def from_dataset(cls, dataset):
        series = dataset.series
        connectivity = pearson_connectivity_batch(series)
        logger.info('computed %d connectivity matrices (%d ROIs)', len(dataset), dataset.n_roi)
        return cls(connectivity=connectivity,
                   vectors=vectorize_batch(connectivity),
                   bold=zscore_rows(series),
                   targets=dataset.targets,
                   subject_ids=dataset.subject_ids,
                   task=dataset.task)

    def take(self, indices):
        indices = np.asarray(indices, dtype=int)
        return ConnectomeArrays(self.connectivity[indices], self.vectors[indices],
                                self.bold[indices], self.targets[indices],
                                [self.subject_ids[i] for i in indices], self.task)

    def __len__(self):
        return len(self.targets)

    @property
    def n_roi(self):
        return self.connectivity.shape[1]


@dataclass(frozen=True)
class Splits:
    """Index partition of one dataset into train/val/test."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: Optional[int] = None

    def arrays(self, arrays):
        return arrays.take(self.train), arrays.take(self.val), arrays.take(self.test)
