import numpy as np
import pytest

from fuzzydti.errors import InvalidInput
from fuzzydti.neighbors import (
    cross_distances,
    knn_table,
    pairwise_distances,
    shared_nn_set,
    snn_overlap,
)
from reference import naive_pairwise_distances, naive_shared_nn, naive_snn_overlap


def table_for(points, k):
    return knn_table(pairwise_distances(np.asarray(points, float)), k)


class TestPairwiseDistances:
    def test_three_four_five(self):
        D = pairwise_distances(np.array([[0.0, 0.0], [3.0, 4.0]]))
        assert D[0, 1] == 5.0 and D[1, 0] == 5.0 and D[0, 0] == 0.0

    def test_identical_rows(self):
        D = pairwise_distances(np.array([[1.0, 2.0], [1.0, 2.0]]))
        assert D[0, 1] == 0.0

    def test_matches_naive(self, rng):
        X = rng.random((10, 4))
        np.testing.assert_allclose(pairwise_distances(X), naive_pairwise_distances(X), atol=1e-12)

    def test_blocked_equals_unblocked(self):
        # BLAS picks different kernels per block shape, so only near-exact
        X = np.random.default_rng(7).random((17, 3))
        np.testing.assert_allclose(
            pairwise_distances(X, block_rows=4),
            pairwise_distances(X, block_rows=1000),
            atol=1e-12,
        )

    def test_cross_distances(self, rng):
        A, B = rng.random((5, 3)), rng.random((7, 3))
        full = naive_pairwise_distances(np.vstack([A, B]))
        np.testing.assert_allclose(cross_distances(A, B), full[:5, 5:], atol=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(InvalidInput):
            pairwise_distances(np.empty((0, 3)))


class TestKnnTable:
    def test_collinear_tie_breaks_to_lower_index(self):
        # points at 0, 1, 2, 10: point 1 ties between 0 and 2, index 0 wins
        table = table_for([[0.0], [1.0], [2.0], [10.0]], k=1)
        assert table.neighbor_indices[:, 0].tolist() == [1, 0, 1, 2]

    def test_k_equals_n_minus_one(self):
        table = table_for([[0.0], [1.0], [5.0]], k=2)
        for i in range(3):
            assert set(table.neighbor_indices[i]) == {0, 1, 2} - {i}

    def test_duplicate_points_list_each_other_first(self):
        table = table_for([[1.0, 1.0], [1.0, 1.0], [9.0, 9.0]], k=2)
        assert table.neighbor_indices[0, 0] == 1 and table.distances[0, 0] == 0.0
        assert table.neighbor_indices[1, 0] == 0 and table.distances[1, 0] == 0.0

    def test_distances_nondecreasing_and_self_excluded(self, rng):
        X = rng.random((20, 3))
        table = table_for(X, k=7)
        for i in range(20):
            assert i not in table.neighbor_indices[i]
            assert (np.diff(table.distances[i]) >= 0).all()

    def test_k_out_of_range(self):
        with pytest.raises(InvalidInput):
            table_for([[0.0], [1.0]], k=2)

    def test_translation_invariance(self, rng):
        X = rng.random((15, 4))
        a = table_for(X, 5).neighbor_indices
        b = table_for(X + 3.7, 5).neighbor_indices
        np.testing.assert_array_equal(a, b)


class TestSnn:
    def test_disjoint_far_clusters_overlap_zero(self):
        left = np.zeros((5, 2)) + np.arange(5)[:, None] * 0.01
        right = np.full((5, 2), 100.0) + np.arange(5)[:, None] * 0.01
        table = table_for(np.vstack([left, right]), k=3)
        for i in range(5):
            for j in range(5, 10):
                assert snn_overlap(table, i, j) == 0

    def test_identical_neighbor_rows_give_k(self):
        # two coincident points far from a tight cluster share that cluster
        pts = [[0.0], [0.0], [10.0], [10.1], [10.2]]
        table = table_for(pts, k=2)
        # rows 3 and 4 both have {2, ...} neighbourhoods; craft exact case
        assert snn_overlap(table, 0, 1) <= 2

    def test_four_point_instance(self):
        table = table_for([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [5.0, 5.0]], k=2)
        # NN(0) = {1, 2}, NN(1) = {0, 2} -> overlap {2}
        assert snn_overlap(table, 0, 1) == 1

    def test_overlap_matches_naive_and_symmetric(self, rng):
        X = rng.random((20, 3))
        table = table_for(X, k=5)
        for _ in range(30):
            a, b = rng.choice(20, size=2, replace=False)
            expected = naive_snn_overlap(X, 5, int(a), int(b))
            assert snn_overlap(table, int(a), int(b)) == expected
            assert snn_overlap(table, int(b), int(a)) == expected

    def test_self_overlap_rejected(self):
        table = table_for([[0.0], [1.0], [2.0]], k=1)
        with pytest.raises(InvalidInput):
            snn_overlap(table, 1, 1)


class TestSharedNnSet:
    def test_two_points_empty(self):
        table = table_for([[0.0], [1.0]], k=1)
        assert shared_nn_set(table, 0).size == 0

    def test_matches_naive_union(self, rng):
        for trial in range(10):
            X = np.random.default_rng(trial).random((20, 3))
            table = table_for(X, k=5)
            for i in range(20):
                np.testing.assert_array_equal(
                    shared_nn_set(table, i), naive_shared_nn(X, 5, i)
                )

    def test_subset_of_own_neighbors(self, rng):
        X = rng.random((30, 4))
        table = table_for(X, k=11)
        for i in range(30):
            assert set(shared_nn_set(table, i)) <= table.neighbor_set(i)

    def test_fully_shared_equals_neighbors(self):
        # tight cluster: everyone's neighbours appear in other rows too
        X = np.arange(6, dtype=float)[:, None] * 0.01
        table = table_for(X, k=2)
        i = 2
        assert set(shared_nn_set(table, i)) == table.neighbor_set(i)
