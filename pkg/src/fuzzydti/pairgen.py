"""Candidate pair generation: positive samples from approved interactions
and a reduced negative pool built from shared-nearest-neighbour sets
clustered by k-medoids.

For each approved (drug i, target j), the representatives are the medoids
of the shared-NN set of i (drug side) and of j (target side), with the
medoid count picked by the Calinski-Harabasz score. The cartesian products
of the representatives, deduplicated and minus the approved pairs, form the
candidate pool.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .clustering import optimal_kmedoids_indices
from .coredata import FeatureMatrix, InteractionSet, PairDataset, substream_seed
from .errors import InvalidInput
from .neighbors import knn_table, pairwise_distances, shared_nn_sets

log = logging.getLogger(__name__)


@dataclass
class CandidatePool:
    positives: PairDataset
    candidates: PairDataset
    provenance: list[tuple[str, str, str, str]]  # drug, target, src_drug, src_target


def _pair_features(
    drugs: FeatureMatrix, targets: FeatureMatrix, drug_idx, target_idx
) -> np.ndarray:
    drug_idx = np.asarray(drug_idx, dtype=int)
    target_idx = np.asarray(target_idx, dtype=int)
    return np.hstack([drugs.values[drug_idx], targets.values[target_idx]])


def build_positive_samples(
    interactions: InteractionSet, drugs: FeatureMatrix, targets: FeatureMatrix
) -> PairDataset:
    """One positive pair sample per approved interaction."""
    n = len(interactions)
    dim = drugs.dim + targets.dim
    if n == 0:
        return PairDataset([], [], np.empty((0, dim)), np.empty(0, dtype=np.int8))
    features = _pair_features(
        drugs, targets, interactions.drug_indices, interactions.target_indices
    )
    return PairDataset(
        [p[0] for p in interactions.pairs],
        [p[1] for p in interactions.pairs],
        features,
        np.ones(n, dtype=np.int8),
    )


def _representatives(
    matrix: FeatureMatrix,
    snn_sets: list[np.ndarray],
    needed: np.ndarray,
    k_range,
    seed: int,
) -> dict[int, np.ndarray]:
    """Medoid entity indices of each needed entity's shared-NN set."""
    reps: dict[int, np.ndarray] = {}
    for i in needed:
        members = snn_sets[int(i)]
        if members.size == 0:
            reps[int(i)] = members
            continue
        local = optimal_kmedoids_indices(
            matrix.values[members], k_range, substream_seed(seed, f"medoids-{i}")
        )
        reps[int(i)] = members[local]
    return reps


def generate_candidates(
    interactions: InteractionSet,
    drugs: FeatureMatrix,
    targets: FeatureMatrix,
    k: int,
    k_range,
    seed: int,
    block_rows: int = 2048,
) -> CandidatePool:
    """Reduced negative-candidate pool for the approved interactions.

    Neighbour tables are computed once per side and indexed per
    interaction; recomputing them per pair would give identical sets at
    O(M + N) times the cost. Candidates are deduplicated across source
    interactions keeping the first provenance, then approved pairs are
    removed.
    """
    if len(interactions) == 0:
        raise InvalidInput("no approved interactions to expand")
    for side, matrix in (("drug", drugs), ("target", targets)):
        if matrix.n < k + 1:
            raise InvalidInput(
                f"{side} matrix has {matrix.n} rows; SNN with k={k} needs at least {k + 1}"
            )
    drug_snn = shared_nn_sets(knn_table(pairwise_distances(drugs, block_rows), k))
    target_snn = shared_nn_sets(knn_table(pairwise_distances(targets, block_rows), k))

    drug_reps = _representatives(
        drugs, drug_snn, np.unique(interactions.drug_indices), k_range,
        substream_seed(seed, "drug-reps"),
    )
    target_reps = _representatives(
        targets, target_snn, np.unique(interactions.target_indices), k_range,
        substream_seed(seed, "target-reps"),
    )

    approved = set(zip(interactions.drug_indices.tolist(), interactions.target_indices.tolist()))
    seen: set[tuple[int, int]] = set()
    cand_drug_idx: list[int] = []
    cand_target_idx: list[int] = []
    provenance: list[tuple[str, str, str, str]] = []
    for (src_drug, src_target), di, ti in zip(
        interactions.pairs, interactions.drug_indices, interactions.target_indices
    ):
        for rd in drug_reps[int(di)]:
            for rt in target_reps[int(ti)]:
                key = (int(rd), int(rt))
                if key in approved or key in seen:
                    continue
                seen.add(key)
                cand_drug_idx.append(key[0])
                cand_target_idx.append(key[1])
                provenance.append(
                    (drugs.ids[key[0]], targets.ids[key[1]], src_drug, src_target)
                )

    positives = build_positive_samples(interactions, drugs, targets)
    dim = drugs.dim + targets.dim
    if cand_drug_idx:
        candidates = PairDataset(
            [drugs.ids[i] for i in cand_drug_idx],
            [targets.ids[i] for i in cand_target_idx],
            _pair_features(drugs, targets, cand_drug_idx, cand_target_idx),
            np.zeros(len(cand_drug_idx), dtype=np.int8),
        )
    else:
        candidates = PairDataset([], [], np.empty((0, dim)), np.empty(0, dtype=np.int8))
    log.info(
        "generated %d candidates from %d interactions (%d drugs x %d targets)",
        len(candidates), len(interactions), drugs.n, targets.n,
    )
    return CandidatePool(positives=positives, candidates=candidates, provenance=provenance)


def assemble_training_pool(positives: PairDataset, candidates: PairDataset) -> PairDataset:
    """Positives and candidates concatenated with labels preserved."""
    if len(candidates) == 0:
        return positives
    if positives.dim != candidates.dim:
        raise InvalidInput(
            f"pair dims differ: positives {positives.dim}, candidates {candidates.dim}"
        )
    return PairDataset.concatenate(positives, candidates)
