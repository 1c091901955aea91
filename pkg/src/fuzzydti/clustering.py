"""k-medoids (PAM) partitioning and Calinski-Harabasz model selection.

PAM runs greedy BUILD then best-improvement SWAP until no swap lowers the
total point-to-medoid distance. All tie-breaks go to the lower index, so a
run is fully determined by its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coredata import FeatureMatrix
from .errors import InvalidInput
from .neighbors import pairwise_distances

_SWAP_EPS = 1e-12  # improvements below rounding noise would cycle forever


@dataclass(frozen=True)
class Clustering:
    medoid_indices: np.ndarray
    assignment: np.ndarray
    cost: float

    @property
    def k(self) -> int:
        return len(self.medoid_indices)


def _as_values(points) -> np.ndarray:
    if isinstance(points, FeatureMatrix):
        return points.values
    values = np.asarray(points, dtype=np.float64)
    return values.reshape(values.shape[0], -1)


def _assign(distances: np.ndarray, medoids: np.ndarray) -> tuple[np.ndarray, float]:
    to_medoids = distances[:, medoids]
    assignment = np.argmin(to_medoids, axis=1)  # first minimum -> lowest medoid index
    assignment[medoids] = np.arange(len(medoids))
    cost = float(to_medoids[np.arange(len(assignment)), assignment].sum())
    return assignment, cost


def _pam(distances: np.ndarray, k: int) -> Clustering:
    n = distances.shape[0]
    # BUILD: start from the 1-medoid optimum, then greedily add the point
    # that lowers total cost the most.
    totals = distances.sum(axis=0)
    medoids = [int(np.argmin(totals))]
    nearest = distances[:, medoids[0]].copy()
    while len(medoids) < k:
        reduced = np.minimum(nearest[None, :], distances)  # candidate x point
        gains = reduced.sum(axis=1)
        gains[medoids] = np.inf
        best = int(np.argmin(gains))
        medoids.append(best)
        nearest = reduced[best]

    medoid_arr = np.sort(np.array(medoids))
    assignment, cost = _assign(distances, medoid_arr)

    # SWAP: evaluate every (medoid, non-medoid) exchange, apply the best
    # strictly-improving one, repeat to convergence.
    while True:
        nearest_pos = assignment
        d_nearest = distances[np.arange(n), medoid_arr[nearest_pos]]
        others = distances[:, medoid_arr].copy()
        others[np.arange(n), nearest_pos] = np.inf
        d_second = others.min(axis=1) if k > 1 else np.full(n, np.inf)

        best_delta = -_SWAP_EPS
        best_swap = None
        non_medoids = np.setdiff1d(np.arange(n), medoid_arr, assume_unique=False)
        for pos in range(k):
            affected = nearest_pos == pos
            base = np.where(affected, d_second, d_nearest)
            for h in non_medoids:
                delta = float(np.minimum(base, distances[:, h]).sum() - d_nearest.sum())
                if delta < best_delta:
                    best_delta = delta
                    best_swap = (pos, int(h))
        if best_swap is None:
            break
        pos, h = best_swap
        medoid_arr[pos] = h
        medoid_arr = np.sort(medoid_arr)
        assignment, cost = _assign(distances, medoid_arr)

    return Clustering(medoid_indices=medoid_arr, assignment=assignment, cost=cost)


def kmedoids(points, k: int, seed: int = 0) -> Clustering:
    """PAM over Euclidean distances. The seed is accepted for interface
    symmetry; BUILD+SWAP with index tie-breaks has no random choices."""
    values = _as_values(points)
    n = values.shape[0]
    if not 1 <= k <= n:
        raise InvalidInput(f"k must be in [1, {n}], got {k}")
    distances = pairwise_distances(values)
    return _pam(distances, k)


def calinski_harabasz(points, clustering: Clustering) -> float:
    """Between/within dispersion ratio normalized by degrees of freedom.

    Zero within-dispersion returns +inf so perfectly tight clusterings win
    model selection; zero between-dispersion returns 0.
    """
    values = _as_values(points)
    n = values.shape[0]
    k = clustering.k
    if k < 2 or k >= n:
        raise InvalidInput(f"Calinski-Harabasz needs 2 <= k < n, got k={k}, n={n}")
    global_mean = values.mean(axis=0)
    between = 0.0
    within = 0.0
    for j in range(k):
        members = values[clustering.assignment == j]
        if members.shape[0] == 0:
            raise InvalidInput(f"cluster {j} is empty")
        center = members.mean(axis=0)
        between += members.shape[0] * float(np.sum((center - global_mean) ** 2))
        within += float(np.sum((members - center) ** 2))
    if between == 0.0:
        return 0.0
    if within == 0.0:
        return float("inf")
    return (between / (k - 1)) / (within / (n - k))


def optimal_kmedoids_indices(points, k_range, seed: int = 0) -> np.ndarray:
    """Medoid row indices of the Calinski-Harabasz-maximizing k in k_range.

    k values are clipped to [2, n-1]; with n <= 2 (or nothing left after
    clipping) every point is returned as its own representative.
    """
    values = _as_values(points)
    n = values.shape[0]
    if n == 0:
        raise InvalidInput("cannot cluster an empty point set")
    usable = [k for k in k_range if 2 <= k <= n - 1]
    if n <= 2 or not usable:
        return np.arange(n)
    distances = pairwise_distances(values)
    best_score = -np.inf
    best_medoids = None
    for k in usable:
        clustering = _pam(distances, k)
        score = calinski_harabasz(values, clustering)
        if score > best_score:
            best_score = score
            best_medoids = clustering.medoid_indices
    return best_medoids


def optimal_kmedoids_centroids(points, k_range, seed: int = 0) -> np.ndarray:
    """Feature rows of the representatives chosen by optimal_kmedoids_indices."""
    values = _as_values(points)
    return values[optimal_kmedoids_indices(values, k_range, seed)]
