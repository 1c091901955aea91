"""Threshold sampling on averaged upper-approximation scores plus ADASYN
oversampling to balance the classes.

Candidates scoring at least t_p are promoted to the positive class; those
at or below t_q are retained as negatives; everything in between is
discarded. The two branches are exclusive, with >= t_p checked first, so a
score equal to both thresholds promotes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coredata import Label, PairDataset, substream_seed
from .errors import EmptyNegativeClass, InvalidInput, MissingScore
from .fuzzyrough import FruaScoreTable
from .neighbors import cross_distances

SYNTHETIC_KEY_SEP = "#s"


@dataclass(frozen=True)
class ThresholdPolicy:
    t_p: float
    t_q: float

    def __post_init__(self):
        if not 0.0 <= self.t_q <= self.t_p <= 1.0:
            raise InvalidInput(
                f"thresholds must satisfy 0 <= t_q <= t_p <= 1, got "
                f"t_q={self.t_q}, t_p={self.t_p}"
            )


@dataclass
class SynthesisReport:
    """Per-minority-seed synthetic counts plus (seed, neighbour) parent
    indices into the pre-synthesis dataset, one entry per synthetic row."""

    generated: np.ndarray
    parents: list[tuple[int, int]]


@dataclass
class BalancedDataset:
    dataset: PairDataset
    report: SynthesisReport
    minority_label: int


def _relabel(dataset: PairDataset, label: Label) -> PairDataset:
    return PairDataset(
        dataset.drug_ids,
        dataset.target_ids,
        dataset.features,
        np.full(len(dataset), label.value, dtype=np.int8),
        dataset.frua_scores,
        dataset.synthetic,
    )


def _attach_scores(dataset: PairDataset, scores: np.ndarray) -> PairDataset:
    return PairDataset(
        dataset.drug_ids,
        dataset.target_ids,
        dataset.features,
        dataset.labels,
        scores,
        dataset.synthetic,
    )


def threshold_partition(
    scores: FruaScoreTable, candidates: PairDataset, policy: ThresholdPolicy
) -> tuple[PairDataset, PairDataset, PairDataset]:
    """(promoted, retained, discarded) datasets; exhaustive and disjoint.

    Promoted candidates come back positive-labeled; every returned sample
    carries its score for audit.
    """
    mapping = scores.as_mapping()
    degree = np.empty(len(candidates), dtype=np.float64)
    for i, key in enumerate(candidates.keys()):
        if key not in mapping:
            raise MissingScore(f"candidate {key} has no score")
        degree[i] = mapping[key]
    scored = _attach_scores(candidates, degree)
    promoted_mask = degree >= policy.t_p
    retained_mask = ~promoted_mask & (degree <= policy.t_q)
    discarded_mask = ~promoted_mask & ~retained_mask
    promoted = _relabel(scored.subset(np.flatnonzero(promoted_mask)), Label.POSITIVE)
    retained = scored.subset(np.flatnonzero(retained_mask))
    discarded = scored.subset(np.flatnonzero(discarded_mask))
    return promoted, retained, discarded


def _knn_indices(distances: np.ndarray, k: int) -> np.ndarray:
    """Row-wise k smallest columns, ties by index; callers pre-mask self."""
    order = np.argsort(distances, axis=1, kind="stable")
    return order[:, :k]


def adasyn(dataset: PairDataset, beta: float, K: int, seed: int) -> BalancedDataset:
    """Adaptive synthetic oversampling of the minority class.

    Targets G = (majority - minority) * beta synthetics, spread over
    minority seeds proportionally to the majority fraction among each
    seed's K nearest neighbours in the full set. Seeds with interior-only
    neighbourhoods everywhere (all r_i = 0) fall back to a uniform
    allocation. Each synthetic interpolates its seed with a random minority
    neighbour; per-seed random substreams keep results reproducible.
    """
    if K < 1:
        raise InvalidInput("adasyn needs K >= 1")
    if beta < 0:
        raise InvalidInput("beta must be non-negative")
    y = np.asarray(dataset.labels)
    n_pos, n_neg = dataset.class_counts
    if n_pos + n_neg != len(dataset):
        raise InvalidInput("adasyn expects only positive/negative labels")
    if n_pos == 0 or n_neg == 0:
        raise InvalidInput("adasyn needs both classes present")

    minority_label = Label.POSITIVE.value if n_pos <= n_neg else Label.NEGATIVE.value
    min_idx = np.flatnonzero(y == minority_label)
    m_s = len(min_idx)
    m_l = len(dataset) - m_s
    G = (m_l - m_s) * beta
    if G <= 0:
        return BalancedDataset(
            dataset, SynthesisReport(np.zeros(m_s, dtype=int), []), minority_label
        )

    X = dataset.features
    dists = cross_distances(X[min_idx], X)
    dists[np.arange(m_s), min_idx] = np.inf  # never your own neighbour

    k_full = min(K, len(dataset) - 1)
    neighbour_idx = _knn_indices(dists, k_full)
    majority_share = (y[neighbour_idx] != minority_label).sum(axis=1) / k_full

    total = majority_share.sum()
    if total == 0:
        counts = np.full(m_s, int(round(G / m_s)), dtype=int)
    else:
        counts = np.rint(majority_share / total * G).astype(int)

    min_dists = dists[:, min_idx]
    k_min = min(K, m_s - 1)
    minority_neighbours = _knn_indices(min_dists, k_min) if k_min > 0 else None

    base_seed = substream_seed(seed, "adasyn")
    syn_features: list[np.ndarray] = []
    syn_drugs: list[str] = []
    syn_targets: list[str] = []
    parents: list[tuple[int, int]] = []
    counter = 0
    for local_i, g_i in enumerate(counts):
        if g_i <= 0:
            continue
        i = int(min_idx[local_i])
        rng = np.random.default_rng([base_seed, local_i])
        for _ in range(g_i):
            if minority_neighbours is None:
                z = i  # single minority seed: duplicate it
            else:
                z = int(min_idx[minority_neighbours[local_i, rng.integers(0, k_min)]])
            lam = rng.random()
            syn_features.append(X[i] + lam * (X[z] - X[i]))
            syn_drugs.append(f"{dataset.drug_ids[i]}{SYNTHETIC_KEY_SEP}{counter}")
            syn_targets.append(f"{dataset.target_ids[i]}{SYNTHETIC_KEY_SEP}{counter}")
            parents.append((i, z))
            counter += 1

    if counter == 0:
        return BalancedDataset(dataset, SynthesisReport(counts, []), minority_label)
    synthetic = PairDataset(
        syn_drugs,
        syn_targets,
        np.vstack(syn_features),
        np.full(counter, minority_label, dtype=np.int8),
        np.full(counter, np.nan),
        np.ones(counter, dtype=bool),
    )
    combined = PairDataset.concatenate(dataset, synthetic)
    return BalancedDataset(combined, SynthesisReport(counts, parents), minority_label)


def balance(
    positives: PairDataset,
    candidates: PairDataset,
    scores: FruaScoreTable,
    policy: ThresholdPolicy,
    beta: float = 1.0,
    K: int = 5,
    seed: int = 0,
) -> BalancedDataset:
    """Threshold partition, then ADASYN over (positives + promoted) versus
    retained negatives."""
    promoted, retained, _ = threshold_partition(scores, candidates, policy)
    if len(retained) == 0:
        raise EmptyNegativeClass(
            f"no candidate scored at or below t_q={policy.t_q}; "
            "raise t_q or rescore"
        )
    pool = PairDataset.concatenate(positives, promoted)
    pool = PairDataset.concatenate(pool, retained)
    return adasyn(pool, beta, K, seed)
