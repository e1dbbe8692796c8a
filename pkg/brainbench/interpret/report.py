"""Builds and writes the interpretability bundle of a trained dual-pathway model.

Bundle files, one set per map kind (`attention`, `lm_weight`):
    edge_map_{kind}.csv          dense n x n map
    top_edges_{kind}.csv         i, j, value, system_i, system_j
    graph_properties_{kind}.json subgraph metrics of the top-fraction graph
    system_blocks_{kind}.csv     6 x 6 system block means
    chord_{kind}.csv             system-pair counts of the top edges
and node_importance_{mode}.csv per node mode plus metadata.json. CSV files
open with a `#` provenance comment line when provenance is given.
"""
from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from brainbench.interpret.graph_metrics import GraphPropertyReport, NullConfig, subgraph_metrics
from brainbench.interpret.maps import (
    TOP_NODES,
    EdgeImportanceMap,
    MapKind,
    NodeImportance,
    NodeMode,
    lm_weight_map,
    mean_attention_map,
    node_importance,
    top_edges,
)
from brainbench.interpret.systems import SYSTEMS, SystemAtlas, SystemBlocks, chord_counts, map_rois_to_systems

logger = logging.getLogger(__name__)

TOP_FRACTION = 0.1
SUBGRAPH_FRACTION = 5.0
NODE_MODES = {MapKind.ATTENTION: (NodeMode.ATTENTION_ROWSUM,),
              MapKind.LM_WEIGHT: (NodeMode.POSITIVE_WEIGHTS, NodeMode.NEGATIVE_WEIGHTS)}


@dataclass
class InterpretBundle:
    maps: Dict[str, EdgeImportanceMap]
    top: Dict[str, list]
    nodes: Dict[str, NodeImportance]
    properties: Dict[str, GraphPropertyReport]
    blocks: Dict[str, SystemBlocks]
    atlas: SystemAtlas
    metadata: dict = field(default_factory=dict)


def interpret_maps(maps, atlas=None, top_fraction=TOP_FRACTION, subgraph_fraction=SUBGRAPH_FRACTION,
                   null_config=NullConfig(), louvain_seed=0, top_nodes=TOP_NODES):
    """Edge, node, subgraph and system summaries of already extracted maps."""
    if not maps:
        raise ValueError('no maps to interpret')
    n = maps[0].n
    placeholder = atlas is None
    atlas = SystemAtlas.contiguous(n) if placeholder else atlas
    bundle = InterpretBundle({}, {}, {}, {}, {}, atlas)
    for edge_map in maps:
        kind = edge_map.kind.value
        bundle.maps[kind] = edge_map
        bundle.top[kind] = top_edges(edge_map, top_fraction)
        for mode in NODE_MODES[edge_map.kind]:
            bundle.nodes[mode.value] = node_importance(edge_map, mode, top_nodes)
        bundle.properties[kind] = subgraph_metrics(edge_map, subgraph_fraction, null_config, louvain_seed)
        bundle.blocks[kind] = map_rois_to_systems(atlas, edge_map)
    bundle.metadata = {
        'attention_source': 'first GAT layer, heads averaged, symmetrized',
        'top_fraction': top_fraction,
        'subgraph_fraction': subgraph_fraction,
        'louvain_seed': louvain_seed,
        'null_model': {'n_nulls': null_config.n_nulls, 'rewires_per_edge': null_config.rewires_per_edge,
                       'seed': null_config.seed},
        'atlas': 'contiguous placeholder' if placeholder else 'provided',
    }
    return bundle


def interpret_model(model, test_arrays, atlas=None, **kwargs):
    """Attention and LM-weight interpretation of `model` over `test_arrays`."""
    maps = [mean_attention_map(model, test_arrays), lm_weight_map(model)]
    bundle = interpret_maps(maps, atlas, **kwargs)
    bundle.metadata['n_test_samples'] = len(test_arrays)
    bundle.metadata['task'] = model.task.value
    bundle.metadata['lm_weight_rule'] = ('class1 minus class0' if model.task.is_classification
                                         else 'regression weights as-is')
    return bundle


def _provenance_line(provenance):
    return ' '.join('%s=%s' % (k, provenance[k]) for k in sorted(provenance))


def _write_rows(path, header, rows, provenance):
    with open(path, 'w', newline='') as f:
        if provenance:
            f.write('# %s\n' % _provenance_line(provenance))
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_bundle(bundle, out_dir, provenance=None):
    """Writes every bundle file into `out_dir`; returns the written paths."""
    provenance = dict(provenance or {})
    os.makedirs(out_dir, exist_ok=True)
    systems = bundle.atlas.systems
    written: List[str] = []
    for kind, edge_map in bundle.maps.items():
        path = os.path.join(out_dir, 'edge_map_%s.csv' % kind)
        np.savetxt(path, edge_map.values, delimiter=',', fmt='%.17g',
                   header=_provenance_line(provenance) if provenance else '')
        written.append(path)
        written.append(_write_rows(
            os.path.join(out_dir, 'top_edges_%s.csv' % kind), ['i', 'j', 'value', 'system_i', 'system_j'],
            [(i, j, repr(v), systems[i], systems[j]) for i, j, v in bundle.top[kind]], provenance))
        path = os.path.join(out_dir, 'graph_properties_%s.json' % kind)
        with open(path, 'w') as f:
            json.dump(dict(bundle.properties[kind].to_dict(), **provenance), f, indent=2, sort_keys=True)
        written.append(path)
        written.append(_write_rows(
            os.path.join(out_dir, 'system_blocks_%s.csv' % kind), ['system'] + list(SYSTEMS),
            [[s] + [repr(float(x)) for x in row] for s, row in zip(SYSTEMS, bundle.blocks[kind].blocks)],
            provenance))
        written.append(_write_rows(
            os.path.join(out_dir, 'chord_%s.csv' % kind), ['system_a', 'system_b', 'count'],
            chord_counts(bundle.top[kind], bundle.atlas), provenance))
    for mode, nodes in bundle.nodes.items():
        rank = {int(i): r for r, i in enumerate(nodes.top_k_indices)}
        written.append(_write_rows(
            os.path.join(out_dir, 'node_importance_%s.csv' % mode), ['roi', 'label', 'system', 'score', 'rank'],
            [(i, bundle.atlas.roi_labels[i], systems[i], repr(float(s)), rank.get(i, ''))
             for i, s in enumerate(nodes.scores)], provenance))
    path = os.path.join(out_dir, 'metadata.json')
    with open(path, 'w') as f:
        json.dump(dict(bundle.metadata, **provenance), f, indent=2, sort_keys=True)
    written.append(path)
    logger.info('wrote %d interpretation files to %s', len(written), out_dir)
    return written
