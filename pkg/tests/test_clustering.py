import numpy as np
import pytest

from fuzzydti.clustering import (
    calinski_harabasz,
    kmedoids,
    optimal_kmedoids_centroids,
    optimal_kmedoids_indices,
)
from fuzzydti.errors import InvalidInput
from fuzzydti.neighbors import pairwise_distances
from reference import exhaustive_kmedoids_cost


def blobs(centers, per_cluster, spread, seed):
    rng = np.random.default_rng(seed)
    points = [
        c + rng.normal(0, spread, size=(per_cluster, len(c))) for c in np.atleast_2d(centers)
    ]
    return np.vstack(points)


class TestKmedoids:
    def test_k_equals_n_zero_cost(self, rng):
        X = rng.random((6, 2))
        result = kmedoids(X, 6)
        assert result.cost == 0.0
        assert sorted(result.medoid_indices.tolist()) == list(range(6))

    def test_two_separated_pairs(self):
        X = np.array([[0.0], [0.1], [10.0], [10.1]])
        result = kmedoids(X, 2)
        sides = {tuple(sorted(np.flatnonzero(result.assignment == j))) for j in range(2)}
        assert sides == {(0, 1), (2, 3)}

    def test_k1_matches_linear_scan(self, rng):
        X = rng.random((12, 3))
        result = kmedoids(X, 1)
        D = pairwise_distances(X)
        assert result.medoid_indices[0] == int(np.argmin(D.sum(axis=0)))
        assert result.cost == pytest.approx(D.sum(axis=0).min())

    def test_cost_consistent_with_assignment(self, rng):
        X = rng.random((15, 2))
        result = kmedoids(X, 3)
        D = pairwise_distances(X)
        recomputed = sum(
            D[i, result.medoid_indices[result.assignment[i]]] for i in range(15)
        )
        assert result.cost == pytest.approx(recomputed, abs=1e-9)

    def test_medoids_own_their_cluster(self, rng):
        X = rng.random((10, 2))
        result = kmedoids(X, 4)
        for pos, m in enumerate(result.medoid_indices):
            assert result.assignment[m] == pos

    def test_near_exhaustive_cost(self):
        # PAM within 5% of the exhaustive optimum on small instances
        for seed in range(50):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(4, 9))
            k = int(rng.integers(1, 4))
            X = rng.random((n, 2))
            result = kmedoids(X, k)
            best = exhaustive_kmedoids_cost(pairwise_distances(X), k)
            assert result.cost <= best * 1.05 + 1e-12

    def test_k_out_of_range(self):
        with pytest.raises(InvalidInput):
            kmedoids(np.zeros((3, 1)), 4)


class TestCalinskiHarabasz:
    def test_tight_far_clusters_hit_max_sentinel(self):
        X = np.array([[0.0], [0.0], [9.0], [9.0]])
        result = kmedoids(X, 2)
        assert calinski_harabasz(X, result) == float("inf")

    def test_all_identical_scores_zero(self):
        X = np.zeros((4, 2))
        result = kmedoids(X, 2)
        assert calinski_harabasz(X, result) == 0.0

    def test_hand_instance(self):
        # {0,1} vs {9,10}: B = 81, W = 1, CH = (81/1)/(1/2) = 162
        X = np.array([[0.0], [1.0], [9.0], [10.0]])
        result = kmedoids(X, 2)
        assert calinski_harabasz(X, result) == pytest.approx(162.0)

    def test_translation_invariant(self, rng):
        X = rng.random((20, 3))
        result = kmedoids(X, 3)
        a = calinski_harabasz(X, result)
        b = calinski_harabasz(X + 11.0, result)
        assert a == pytest.approx(b, abs=1e-9)

    def test_k_bounds(self):
        X = np.random.default_rng(0).random((5, 2))
        with pytest.raises(InvalidInput):
            calinski_harabasz(X, kmedoids(X, 1))


class TestOptimalCentroids:
    def test_three_blobs_found(self):
        hits = 0
        for seed in range(10):
            X = blobs([[0.0, 0.0], [5.0, 5.0], [0.0, 5.0]], 15, 0.25, seed)
            medoids = optimal_kmedoids_indices(X, range(2, 7))
            if len(medoids) == 3:
                hits += 1
        assert hits >= 9

    def test_single_point_returned(self):
        X = np.array([[2.0, 3.0]])
        np.testing.assert_array_equal(optimal_kmedoids_centroids(X, range(2, 11)), X)

    def test_two_points_returned(self):
        X = np.array([[0.0], [1.0]])
        np.testing.assert_array_equal(optimal_kmedoids_centroids(X, range(2, 11)), X)

    def test_unusable_range_falls_back_to_all(self):
        X = np.random.default_rng(1).random((4, 2))
        assert len(optimal_kmedoids_indices(X, range(5, 11))) == 4
