"""Validation-set grid search with a deterministic tie-break."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
from sklearn.model_selection import ParameterGrid

from brainbench.bench.errors import RunFailure
from brainbench.bench.models import run_cell

logger = logging.getLogger(__name__)


@dataclass
class GridResult:
    best_params: Dict[str, Any]
    best_score: float
    scores: List[float] = field(default_factory=list)
    points: List[Dict[str, Any]] = field(default_factory=list)


def resolve_grid(grid, n_features):
    """Drops feature counts m above n_features; 'all' stays."""
    if 'm' not in grid:
        return dict(grid)
    counts = [m for m in grid['m'] if m in ('all', None) or int(m) < n_features]
    resolved = dict(grid)
    resolved['m'] = counts or ['all']
    return resolved


def grid_points(grid):
    """Grid points in ParameterGrid order (keys sorted, last key varies fastest)."""
    return list(ParameterGrid(grid)) if grid else [{}]


def grid_search(model, train, val, train_config, seed, scorer=None):
    """Best point of `model.grid` by validation metric; ties keep the earlier point.

    `scorer(params) -> float` defaults to one seeded fit of the model on
    train scored on val. Points that raise or score NaN are skipped;
    RunFailure when none is left.
    """
    points = [dict(model.params, **p) for p in grid_points(resolve_grid(model.grid, train.vectors.shape[1]))]
    if scorer is None:
        def scorer(params):
            return run_cell(model.kind, params, train, val, val, train_config, seed).val_metric

    scores = []
    best = None
    for index, params in enumerate(points):
        try:
            score = float(scorer(params))
        except (ValueError, ArithmeticError, RuntimeError) as e:
            logger.warning('%s grid point %s failed: %s', model.name, params, e)
            score = float('nan')
        scores.append(score)
        logger.debug('%s grid point %d/%d %s: %.4f', model.name, index + 1, len(points), params, score)
        if not np.isnan(score) and (best is None or score > scores[best]):
            best = index
    if best is None:
        raise RunFailure('all %d grid points failed for model %s' % (len(points), model.name))
    logger.info('%s: chose %s (val %.4f)', model.name, points[best], scores[best])
    return GridResult(points[best], scores[best], scores, points)
