"""Pairwise Euclidean distances, k-nearest-neighbour tables, and shared
nearest neighbour (SNN) sets.

The SNN similarity of two entities is the overlap of their k-NN sets; an
entity's shared-NN set is the union of those overlaps against every other
entity, which is always a subset of its own k-NN set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coredata import FeatureMatrix
from .errors import InvalidInput


@dataclass(frozen=True)
class NeighborTable:
    """Per-row k nearest other rows, ascending distance, ties by index."""

    k: int
    neighbor_indices: np.ndarray  # n x k
    distances: np.ndarray  # n x k

    @property
    def n(self) -> int:
        return self.neighbor_indices.shape[0]

    def neighbor_set(self, i: int) -> set[int]:
        return set(int(j) for j in self.neighbor_indices[i])


def pairwise_distances(matrix: FeatureMatrix | np.ndarray, block_rows: int = 2048) -> np.ndarray:
    """Full symmetric Euclidean distance matrix, computed in row blocks to
    bound the memory of the intermediate difference tensors."""
    values = matrix.values if isinstance(matrix, FeatureMatrix) else np.asarray(matrix, float)
    n = values.shape[0]
    if n == 0:
        raise InvalidInput("cannot compute distances of an empty matrix")
    sq_norms = np.einsum("ij,ij->i", values, values)
    out = np.empty((n, n), dtype=np.float64)
    for start in range(0, n, block_rows):
        stop = min(start + block_rows, n)
        block = values[start:stop]
        # ||x - y||^2 = ||x||^2 + ||y||^2 - 2 x.y, clipped against rounding
        sq = sq_norms[start:stop, None] + sq_norms[None, :] - 2.0 * (block @ values.T)
        np.maximum(sq, 0.0, out=sq)
        out[start:stop] = np.sqrt(sq)
    np.fill_diagonal(out, 0.0)
    return np.minimum(out, out.T)


def cross_distances(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Rectangular Euclidean distance matrix between two row sets."""
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    sq = (
        np.einsum("ij,ij->i", left, left)[:, None]
        + np.einsum("ij,ij->i", right, right)[None, :]
        - 2.0 * (left @ right.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.sqrt(sq)


def knn_table(distances: np.ndarray, k: int) -> NeighborTable:
    """k nearest other indices per row; distance ties break to the smaller
    index (stable argsort), self always excluded."""
    n = distances.shape[0]
    if not 1 <= k <= n - 1:
        raise InvalidInput(f"k must be in [1, {n - 1}], got {k}")
    masked = distances.copy()
    np.fill_diagonal(masked, np.inf)
    order = np.argsort(masked, axis=1, kind="stable")[:, :k]
    dists = np.take_along_axis(masked, order, axis=1)
    return NeighborTable(k=k, neighbor_indices=order, distances=dists)


def snn_overlap(table: NeighborTable, x: int, y: int) -> int:
    """|NN_k(x) intersect NN_k(y)|, an integer in [0, k]."""
    if x == y:
        raise InvalidInput("SNN overlap is defined for distinct entities")
    return len(table.neighbor_set(x) & table.neighbor_set(y))


def shared_nn_set(table: NeighborTable, i: int) -> np.ndarray:
    """Union over all other rows r of NN_k(i) intersect NN_k(r).

    A member j of NN_k(i) belongs to the union exactly when j also appears
    in some other row's neighbour list; membership counts over the whole
    table answer that in O(nk).
    """
    counts = np.bincount(table.neighbor_indices.ravel(), minlength=table.n)
    members = table.neighbor_indices[i]
    # each member already appears once via row i itself
    return np.sort(members[counts[members] >= 2])


def shared_nn_sets(table: NeighborTable) -> list[np.ndarray]:
    """shared_nn_set for every row, sharing one membership-count pass."""
    counts = np.bincount(table.neighbor_indices.ravel(), minlength=table.n)
    out = []
    for i in range(table.n):
        members = table.neighbor_indices[i]
        out.append(np.sort(members[counts[members] >= 2]))
    return out
