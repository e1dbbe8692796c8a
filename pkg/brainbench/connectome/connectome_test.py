import numpy as np
import pytest

from brainbench.connectome import (
    ConnectomeWarning,
    SignMode,
    TimeSeriesMatrix,
    connection_profiles,
    devectorize,
    edge_budget,
    pearson_connectivity,
    threshold_top_k,
    vectorize_upper,
)


def _edges(graph):
    rows, cols = np.nonzero(np.triu(graph.adjacency, k=1))
    return set(zip(rows.tolist(), cols.tolist()))


def _toy_conn():
    # 0-based version of A12=0.9, A13=0.5, A14=-0.8, A23=0.2, A24=0.1, A34=-0.3
    u = [0.9, 0.5, -0.8, 0.2, 0.1, -0.3]
    return devectorize(u, 4)


def test_pearson_perfect_linear_dependence():
    x = np.array([0.3, 1.2, -0.7, 2.5, 0.1])
    conn = pearson_connectivity(TimeSeriesMatrix(np.stack([x, 2 * x + 3])))
    assert conn.values[0, 1] == pytest.approx(1.0)
    conn = pearson_connectivity(TimeSeriesMatrix(np.stack([x, -x])))
    assert conn.values[0, 1] == pytest.approx(-1.0)


def test_pearson_hand_value():
    conn = pearson_connectivity(TimeSeriesMatrix([[1, 2, 3, 4], [1, 3, 2, 4]]))
    assert conn.values[0, 1] == pytest.approx(0.8, abs=1e-12)


def test_pearson_matrix_properties(random_bold):
    conn = pearson_connectivity(random_bold(n_roi=12, t=40, seed=3)).values
    assert np.array_equal(conn, conn.T)
    assert np.all(np.diag(conn) == 1.0)
    assert np.all(np.abs(conn) <= 1.0)


def test_pearson_affine_invariance(random_bold):
    bold = random_bold(n_roi=8, t=30, seed=11)
    values = bold.values.copy()
    values[2] = 4.5 * values[2] - 17.0
    values[5] = 0.01 * values[5] + 3.0
    a = pearson_connectivity(bold).values
    b = pearson_connectivity(TimeSeriesMatrix(values)).values
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_pearson_zero_variance_row_warns_and_is_zero():
    bold = TimeSeriesMatrix([[1, 2, 3, 4], [5, 5, 5, 5], [4, 1, 3, 2]])
    with pytest.warns(ConnectomeWarning, match='roi_1'):
        conn = pearson_connectivity(bold)
    assert np.all(conn.values[1, [0, 2]] == 0.0)
    assert conn.values[1, 1] == 1.0


def test_non_finite_series_names_roi():
    with pytest.raises(ValueError, match='ROI 1'):
        TimeSeriesMatrix([[1.0, 2.0, 3.0], [1.0, np.nan, 2.0]])


def test_pearson_is_bit_reproducible(random_bold):
    bold = random_bold(n_roi=10, t=25, seed=5)
    assert np.array_equal(pearson_connectivity(bold).values, pearson_connectivity(bold).values)


def test_vectorize_order_and_lengths():
    conn = devectorize([0.1, 0.2, 0.3], 3)
    assert vectorize_upper(conn).values.tolist() == [0.1, 0.2, 0.3]
    assert vectorize_upper(conn).index_map == [(0, 1), (0, 2), (1, 2)]
    assert vectorize_upper(np.eye(200)).values.size == 19900
    assert vectorize_upper(np.eye(360)).values.size == 64620


def test_vectorize_devectorize_round_trip(random_conn):
    conn = random_conn(n=9, seed=2)
    u = vectorize_upper(conn)
    assert np.array_equal(devectorize(u), conn.values)
    assert np.array_equal(vectorize_upper(devectorize(u)).values, u.values)


def test_threshold_zero_density_is_empty(random_conn):
    graph = threshold_top_k(random_conn(n=7, seed=1), 0)
    assert graph.n_edges == 0


def test_threshold_positive_only_hand_case():
    graph = threshold_top_k(_toy_conn(), 50, SignMode.POSITIVE_ONLY)
    assert _edges(graph) == {(0, 1), (0, 2), (1, 2)}


def test_threshold_signed_hand_case():
    graph = threshold_top_k(_toy_conn(), 50, SignMode.SIGNED)
    assert _edges(graph) == {(0, 1), (0, 3), (0, 2)}
    assert graph.adjacency[0, 3] == -0.8


def test_threshold_tie_breaks_lexicographically():
    conn = devectorize([0.5, 0.5, 0.5, 0.5, 0.5, 0.5], 4)
    graph = threshold_top_k(conn, 50)
    assert _edges(graph) == {(0, 1), (0, 2), (0, 3)}


@pytest.mark.parametrize('mode', [SignMode.POSITIVE_ONLY, SignMode.SIGNED])
def test_threshold_count_and_nesting(random_conn, mode):
    conn = random_conn(n=15, seed=8)
    upper = conn.values[np.triu_indices(15, k=1)]
    eligible = np.count_nonzero(upper > 0) if mode is SignMode.POSITIVE_ONLY else upper.size
    previous = set()
    for k in [0, 1, 5, 10, 20, 35, 50, 80, 100]:
        graph = threshold_top_k(conn, k, mode)
        assert graph.n_edges == min(edge_budget(15, k), eligible)
        assert previous <= _edges(graph)
        previous = _edges(graph)


def test_edge_budget_matches_reported_counts():
    assert edge_budget(360, 0.1) == 65
    assert edge_budget(360, 5) == 3231
    assert edge_budget(360, 100) == 64620


def test_threshold_rejects_out_of_range(random_conn):
    with pytest.raises(ValueError):
        threshold_top_k(random_conn(n=4, seed=0), 101)


def test_connection_profiles_are_rows():
    c = 0.37
    conn = devectorize([c], 2)
    profiles = connection_profiles(conn).values
    assert profiles.tolist() == [[1.0, c], [c, 1.0]]
    assert connection_profiles(np.eye(200)).values.shape == (200, 200)
