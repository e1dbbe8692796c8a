"""ROI to neural-system mapping and system-level aggregation of edge maps."""
from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

# somatomotor, default mode, ventral salience, central executive, dorsal salience, visual
SYSTEMS = ('SM', 'DMN', 'VS', 'CE', 'DS', 'Vis')


@dataclass(frozen=True)
class SystemAtlas:
    systems: Tuple[str, ...]
    roi_labels: Tuple[str, ...] = ()

    def __post_init__(self):
        unknown = sorted(set(self.systems) - set(SYSTEMS))
        if unknown:
            raise ValueError('unknown neural systems %s; expected one of %s' % (unknown, list(SYSTEMS)))
        labels = tuple(self.roi_labels) or tuple('roi_%d' % i for i in range(len(self.systems)))
        if len(labels) != len(self.systems):
            raise ValueError('%d ROI labels for %d ROIs' % (len(labels), len(self.systems)))
        object.__setattr__(self, 'systems', tuple(self.systems))
        object.__setattr__(self, 'roi_labels', labels)

    @classmethod
    def contiguous(cls, n):
        """Placeholder atlas splitting n ROIs into six contiguous runs."""
        return cls(tuple(SYSTEMS[i * len(SYSTEMS) // n] for i in range(n)))

    def __len__(self):
        return len(self.systems)

    def groups(self) -> Dict[str, List[int]]:
        return {s: [i for i, t in enumerate(self.systems) if t == s] for s in SYSTEMS}


def load_atlas(path):
    """Reads a `roi_index,roi_label,system` CSV into a SystemAtlas."""
    if not os.path.exists(path):
        raise FileNotFoundError('atlas not found: %s' % path)
    with open(path, newline='') as f:
        rows = list(csv.DictReader(f))
    if not rows or not {'roi_index', 'roi_label', 'system'} <= set(rows[0]):
        raise ValueError('%s: atlas needs columns roi_index, roi_label, system' % path)
    rows.sort(key=lambda r: int(r['roi_index']))
    indices = [int(r['roi_index']) for r in rows]
    if indices != list(range(len(rows))):
        raise ValueError('%s: roi_index must enumerate 0..%d exactly once' % (path, len(rows) - 1))
    atlas = SystemAtlas(tuple(r['system'].strip() for r in rows), tuple(r['roi_label'] for r in rows))
    logger.info('loaded atlas %s with %d ROIs', path, len(atlas))
    return atlas


@dataclass(frozen=True)
class SystemBlocks:
    blocks: np.ndarray
    groups: Dict[str, List[int]]
    kind: str


def map_rois_to_systems(atlas, edge_map):
    """6 x 6 matrix of mean importance over ROI pairs (i != j) in each system pair.

    Blocks for systems without a pair of ROIs are zero.
    """
    if len(atlas) != edge_map.n:
        raise ValueError('atlas maps %d ROIs but the map has %d; every ROI needs a system'
                         % (len(atlas), edge_map.n))
    groups = atlas.groups()
    values = edge_map.values
    off_diagonal = ~np.eye(edge_map.n, dtype=bool)
    blocks = np.zeros((len(SYSTEMS), len(SYSTEMS)))
    for a, s in enumerate(SYSTEMS):
        for b, t in enumerate(SYSTEMS):
            mask = off_diagonal[np.ix_(groups[s], groups[t])]
            if mask.any():
                blocks[a, b] = values[np.ix_(groups[s], groups[t])][mask].mean()
    return SystemBlocks((blocks + blocks.T) / 2.0, groups, edge_map.kind.value)


def chord_counts(edges: Sequence[tuple], atlas):
    """Number of edges per unordered system pair, for chord diagrams."""
    counts = {}
    for i, j, _ in edges:
        key = tuple(sorted((atlas.systems[i], atlas.systems[j]), key=SYSTEMS.index))
        counts[key] = counts.get(key, 0) + 1
    return [(s, t, counts[(s, t)]) for s, t in sorted(counts, key=lambda k: (SYSTEMS.index(k[0]),
                                                                                SYSTEMS.index(k[1])))]
