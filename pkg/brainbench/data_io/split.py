from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from brainbench.data_io.dataset import Splits

logger = logging.getLogger(__name__)

MIN_SUBJECTS = 10


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70
    val_fraction: float = 0.10
    test_fraction: float = 0.20
    seed: int = 0
    fixed: bool = False

    def __post_init__(self):
        fractions = (self.train_fraction, self.val_fraction, self.test_fraction)
        if any(f <= 0 for f in fractions):
            raise ValueError('split fractions must be positive, got %s' % (fractions,))
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ValueError('split fractions must sum to 1, got %r' % sum(fractions))

    def with_seed(self, seed):
        return SplitSpec(self.train_fraction, self.val_fraction, self.test_fraction, seed, self.fixed)


def _half_up(x):
    return int(math.floor(x + 0.5))


def split_indices(n_subjects, spec):
    """Seeded index partition; val/test get round(f*N), train takes the rest."""
    if n_subjects < MIN_SUBJECTS:
        raise ValueError('splitting needs at least %d subjects, got %d' % (MIN_SUBJECTS, n_subjects))
    n_val = _half_up(spec.val_fraction * n_subjects)
    n_test = _half_up(spec.test_fraction * n_subjects)
    n_train = n_subjects - n_val - n_test
    if min(n_train, n_val, n_test) <= 0:
        raise ValueError('split of %d subjects leaves an empty subset (%d/%d/%d)'
                         % (n_subjects, n_train, n_val, n_test))
    order = np.random.default_rng(spec.seed).permutation(n_subjects)
    return Splits(train=np.sort(order[:n_train]),
                  val=np.sort(order[n_train:n_train + n_val]),
                  test=np.sort(order[n_train + n_val:]),
                  seed=spec.seed)


def make_split(dataset, spec=SplitSpec()):
    """(train, val, test) datasets, disjoint and exhaustive."""
    splits = split_indices(len(dataset), spec)
    logger.debug('split seed %d -> %d/%d/%d', spec.seed, splits.train.size, splits.val.size,
                 splits.test.size)
    return dataset.subset(splits.train), dataset.subset(splits.val), dataset.subset(splits.test)
