import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from coupled_align.errors import ConfigError, DataError, IsolatedVertex
from coupled_align.graph import (
    Dataset,
    GraphConfig,
    HeatKernel,
    KNearest,
    Simple,
    build_weights,
    degree_matrix,
    epsilon_graph,
    heat_weights,
    knn_graph,
    median_sq_distance,
    simple_weights,
)

from conftest import K3, P3

LINE = np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])

points = arrays(
    np.float64, st.tuples(st.integers(2, 9), st.integers(1, 3)),
    elements=st.floats(-10, 10, allow_nan=False, width=32),
)

small_points = arrays(
    np.float64, st.tuples(st.integers(2, 9), st.integers(1, 3)),
    elements=st.floats(-2, 2, allow_nan=False, width=32),
)


def edges(adj):
    s, j = np.nonzero(np.triu(adj))
    return {(int(a) + 1, int(b) + 1) for a, b in zip(s, j)}


class TestDataset:
    def test_rejects_duplicate_ids(self):
        with pytest.raises(DataError):
            Dataset(("a", "a"), np.zeros((2, 1)))

    def test_rejects_single_point(self):
        with pytest.raises(DataError):
            Dataset(("a",), np.zeros((1, 1)))

    def test_rejects_nan(self):
        with pytest.raises(DataError):
            Dataset(("a", "b"), np.array([[0.0], [np.nan]]))


class TestEpsilonGraph:
    @pytest.mark.parametrize("eps, expected", [(1.5, {(1, 2)}), (0.5, set()), (10, {(1, 2), (1, 3), (2, 3)})])
    def test_line(self, eps, expected):
        assert edges(epsilon_graph(LINE, eps)) == expected

    def test_strict_inequality(self):
        assert edges(epsilon_graph(LINE, 1.0)) == set()

    def test_rejects_nonpositive(self):
        with pytest.raises(ConfigError):
            epsilon_graph(LINE, 0.0)

    @given(points, st.floats(0.01, 5), st.floats(0.01, 5))
    def test_symmetric_and_monotone(self, x, e1, e2):
        lo, hi = sorted((e1, e2))
        a, b = epsilon_graph(x, lo), epsilon_graph(x, hi)
        assert np.array_equal(a, a.T) and not a.diagonal().any()
        assert not np.any(a & ~b)


class TestKnnGraph:
    def test_line_k1(self):
        assert edges(knn_graph(LINE, 1)) == {(1, 2), (2, 3)}

    def test_full(self):
        assert edges(knn_graph(LINE, 2)) == {(1, 2), (1, 3), (2, 3)}

    def test_duplicates_first(self):
        x = np.array([[0.0], [5.0], [0.0], [9.0]])
        assert knn_graph(x, 1)[0, 2]

    def test_tie_goes_to_lower_index(self):
        # point 0 is equidistant from 1 and 2; those two have closer partners
        x = np.array([[0.0], [-1.0], [1.0], [-1.1], [1.1]])
        adj = knn_graph(x, 1)
        assert adj[0, 1] and not adj[0, 2]

    @pytest.mark.parametrize("k", [0, 3])
    def test_out_of_range(self, k):
        with pytest.raises(ConfigError):
            knn_graph(LINE, k)

    @given(points, st.integers(1, 8))
    def test_symmetric(self, x, k):
        if k >= len(x):
            return
        a = knn_graph(x, k)
        assert np.array_equal(a, a.T) and not a.diagonal().any()
        assert np.all(a.sum(axis=1) >= k)


class TestWeights:
    def test_heat_unit_distance(self):
        w = heat_weights(np.array([[0.0], [1.0]]), np.array([[0, 1], [1, 0]], bool), 1.0).w
        assert w[0, 1] == pytest.approx(math.exp(-1), abs=1e-15)
        assert w[0, 1] == pytest.approx(0.3678794, abs=1e-7)

    def test_heat_coincident(self):
        w = heat_weights(np.zeros((2, 1)), ~np.eye(2, dtype=bool), 2.0).w
        assert w[0, 1] == 1.0

    def test_heat_non_adjacent(self):
        assert heat_weights(LINE, np.zeros((3, 3), bool), 1.0).w[0, 2] == 0

    def test_heat_zero_t(self):
        with pytest.raises(ConfigError):
            heat_weights(LINE, knn_graph(LINE, 1), 0.0)

    def test_heat_negative_t_warns(self, caplog):
        w = heat_weights(LINE, knn_graph(LINE, 1), -1.0).w
        assert w[0, 1] > 1
        assert "negative" in caplog.text

    @given(small_points, st.floats(0.5, 10))
    def test_heat_range(self, x, t):
        adj = knn_graph(x, 1)
        w = heat_weights(x, adj, t).w
        assert np.array_equal(w, w.T)
        assert np.array_equal(w > 0, adj)
        assert np.all(w <= 1)

    def test_simple(self):
        assert np.array_equal(simple_weights(K3.astype(bool)).w, K3)
        assert np.array_equal(simple_weights(np.zeros((3, 3), bool)).w, np.zeros((3, 3)))
        assert np.array_equal(simple_weights(P3.astype(bool)).w, P3)


class TestDegree:
    def test_k3(self):
        np.testing.assert_array_equal(degree_matrix(K3), 2 * np.eye(3))

    def test_p3(self):
        np.testing.assert_array_equal(degree_matrix(P3), np.diag([1.0, 2, 1]))

    def test_isolated(self):
        w = P3.copy()
        w[:, 2] = w[2, :] = 0
        with pytest.raises(IsolatedVertex) as info:
            degree_matrix(w)
        assert info.value.index == 2

    @given(points)
    def test_simple_degree_is_vertex_degree(self, x):
        adj = knn_graph(x, 1)
        np.testing.assert_array_equal(np.diagonal(degree_matrix(simple_weights(adj))), adj.sum(axis=0))


def test_build_weights_matches_parts():
    x = np.random.default_rng(0).standard_normal((12, 3))
    t = median_sq_distance(x)
    w = build_weights(x, GraphConfig(KNearest(3), HeatKernel(t))).w
    np.testing.assert_array_equal(w, heat_weights(x, knn_graph(x, 3), t).w)
    s = build_weights(x, GraphConfig(KNearest(3), Simple())).w
    np.testing.assert_array_equal(s, knn_graph(x, 3).astype(float))
