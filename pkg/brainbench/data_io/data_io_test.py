import json
import os

import numpy as np
import pytest

from brainbench.connectome import TimeSeriesMatrix, pearson_connectivity_batch, vectorize_batch
from brainbench.data_io import (
    DEFAULT_EFFECT_SIZE,
    ConnectomeArrays,
    SplitSpec,
    SyntheticConfig,
    Task,
    generate_synthetic,
    load_dataset,
    make_split,
    split_indices,
    truncate_series,
    write_dataset,
)


def _write_manifest(tmp_path, subjects, task='regression'):
    path = tmp_path / 'manifest.json'
    path.write_text(json.dumps({'task': task, 'atlas': 'toy', 'subjects': subjects}))
    return str(path)


def _write_series(tmp_path, name, values):
    np.savetxt(str(tmp_path / name), values, delimiter=',')
    return name


def test_loader_reads_three_subjects_in_order(tmp_path):
    rng = np.random.default_rng(0)
    subjects = [{'id': 's%d' % i, 'series_file': _write_series(tmp_path, 's%d.csv' % i,
                                                               rng.standard_normal((5, 20))),
                 'target': float(i)} for i in (2, 0, 1)]
    dataset = load_dataset(_write_manifest(tmp_path, subjects))
    assert dataset.subject_ids == ['s2', 's0', 's1']
    assert (dataset.n_roi, dataset.series_length) == (5, 20)
    assert dataset.task is Task.REGRESSION


def test_loader_missing_file_names_subject(tmp_path):
    subjects = [{'id': 'present', 'series_file': _write_series(tmp_path, 'a.csv', np.ones((3, 4)) +
                                                               np.arange(4))},
                {'id': 'ghost', 'series_file': 'nope.csv', 'target': 1.0}]
    subjects[0]['target'] = 0.5
    with pytest.raises(FileNotFoundError, match='ghost'):
        load_dataset(_write_manifest(tmp_path, subjects))


def test_loader_rejects_non_numeric_regression_target(tmp_path):
    name = _write_series(tmp_path, 'a.csv', np.arange(12.0).reshape(3, 4) ** 2)
    subjects = [{'id': 'bad', 'series_file': name, 'target': 'high'}]
    with pytest.raises(ValueError, match='bad'):
        load_dataset(_write_manifest(tmp_path, subjects))


def test_loader_rejects_unknown_task(tmp_path):
    with pytest.raises(ValueError, match='unknown task'):
        load_dataset(_write_manifest(tmp_path, [], task='multiclass'))


def test_loader_rejects_shape_mismatch(tmp_path):
    rng = np.random.default_rng(1)
    subjects = [{'id': 'a', 'series_file': _write_series(tmp_path, 'a.csv', rng.standard_normal((4, 10))),
                 'target': 1.0},
                {'id': 'b', 'series_file': _write_series(tmp_path, 'b.csv', rng.standard_normal((4, 9))),
                 'target': 2.0}]
    with pytest.raises(ValueError, match='subject b'):
        load_dataset(_write_manifest(tmp_path, subjects))


def test_loader_round_trip(tmp_path, small_dataset):
    manifest = write_dataset(small_dataset, str(tmp_path))
    again = load_dataset(manifest)
    assert again.subject_ids == small_dataset.subject_ids
    assert again.planted_edges == small_dataset.planted_edges
    np.testing.assert_allclose(again.series, small_dataset.series, atol=1e-12, rtol=0)
    np.testing.assert_array_equal(again.targets, small_dataset.targets)


def test_truncate_series():
    bold = TimeSeriesMatrix(np.random.default_rng(2).standard_normal((3, 120)))
    short = truncate_series(bold, 100)
    assert short.values.shape == (3, 100)
    np.testing.assert_array_equal(short.values, bold.values[:, :100])
    np.testing.assert_array_equal(truncate_series(bold, 120).values, bold.values)
    with pytest.raises(ValueError, match='shorter'):
        truncate_series(TimeSeriesMatrix(np.random.default_rng(3).standard_normal((3, 50))), 512)


@pytest.mark.parametrize('n, sizes', [(100, (70, 10, 20)), (10, (7, 1, 2))])
def test_split_sizes(n, sizes):
    splits = split_indices(n, SplitSpec(seed=4))
    assert (splits.train.size, splits.val.size, splits.test.size) == sizes
    everything = np.concatenate([splits.train, splits.val, splits.test])
    assert sorted(everything.tolist()) == list(range(n))


def test_split_is_seed_determined(small_dataset):
    a = make_split(small_dataset, SplitSpec(seed=9))
    b = make_split(small_dataset, SplitSpec(seed=9))
    assert [d.subject_ids for d in a] == [d.subject_ids for d in b]
    c = make_split(small_dataset, SplitSpec(seed=10))
    assert [d.subject_ids for d in a] != [d.subject_ids for d in c]


def test_split_spec_validation():
    with pytest.raises(ValueError):
        SplitSpec(0.5, 0.3, 0.3)
    with pytest.raises(ValueError):
        split_indices(9, SplitSpec())


def test_synthetic_is_bit_identical():
    config = SyntheticConfig(n_subjects=20, n_roi=6, series_length=30, n_signal_edges=4, seed=7)
    a, b = generate_synthetic(config), generate_synthetic(config)
    assert np.array_equal(a.series, b.series)
    assert np.array_equal(a.targets, b.targets)
    assert a.planted_edges == b.planted_edges


def test_synthetic_rejects_infeasible_edge_count():
    with pytest.raises(ValueError):
        SyntheticConfig(n_roi=4, n_signal_edges=7)


def _planted_correlations(dataset):
    conn = pearson_connectivity_batch(dataset.series)
    rows, cols = zip(*dataset.planted_edges)
    weights = conn[:, rows, cols]
    y = dataset.targets
    return np.array([np.corrcoef(w, y)[0, 1] for w in weights.T])


def test_synthetic_without_effect_is_independent_of_target():
    config = SyntheticConfig(n_subjects=400, n_roi=20, series_length=64, n_signal_edges=30,
                             effect_size=0.0, seed=7)
    r = _planted_correlations(generate_synthetic(config))
    assert np.mean(np.abs(r)) < 0.1


def test_default_effect_size_is_pinned():
    assert DEFAULT_EFFECT_SIZE == 0.08
    assert SyntheticConfig().effect_size == DEFAULT_EFFECT_SIZE


def test_synthetic_planted_edges_are_recoverable():
    dataset = generate_synthetic(SyntheticConfig())
    u = vectorize_batch(pearson_connectivity_batch(dataset.series))
    y = dataset.targets
    uc = u - u.mean(axis=0)
    yc = y - y.mean()
    r = np.abs(uc.T @ yc) / (np.linalg.norm(uc, axis=0) * np.linalg.norm(yc))
    top = set(np.argsort(-r, kind='stable')[:len(dataset.planted_edges)].tolist())

    n = dataset.n_roi
    planted = {i * n - i * (i + 1) // 2 + (j - i - 1) for i, j in dataset.planted_edges}
    assert len(top & planted) >= 0.8 * len(planted)


def test_connectome_arrays_cache(small_dataset):
    arrays = ConnectomeArrays.from_dataset(small_dataset)
    n = small_dataset.n_roi
    assert arrays.connectivity.shape == (len(small_dataset), n, n)
    assert arrays.vectors.shape == (len(small_dataset), n * (n - 1) // 2)
    np.testing.assert_allclose(arrays.bold.mean(axis=-1), 0.0, atol=1e-12)
    part = arrays.take([3, 1])
    assert part.subject_ids == [small_dataset.subject_ids[3], small_dataset.subject_ids[1]]
