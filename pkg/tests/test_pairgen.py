import numpy as np
import pytest

from fuzzydti.coredata import FeatureMatrix, InteractionSet, min_max_normalize
from fuzzydti.errors import DuplicatePair, InvalidInput
from fuzzydti.pairgen import (
    assemble_training_pool,
    build_positive_samples,
    generate_candidates,
)
from fuzzydti.synthdata import make_planted_data


def interactions_from(pairs, drugs, targets):
    drug_index = drugs.index_of()
    target_index = targets.index_of()
    return InteractionSet(
        pairs=tuple(pairs),
        drug_indices=np.array([drug_index[d] for d, _ in pairs], dtype=int),
        target_indices=np.array([target_index[t] for _, t in pairs], dtype=int),
    )


@pytest.fixture(scope="module")
def planted():
    data = make_planted_data(n_drugs=60, n_targets=45, n_interactions=60, seed=3)
    drugs = min_max_normalize(data.drugs)
    targets = min_max_normalize(data.targets)
    inter = interactions_from(data.interactions, drugs, targets)
    return data, drugs, targets, inter


class TestBuildPositives:
    def test_one_sample_per_interaction(self, planted):
        _, drugs, targets, inter = planted
        positives = build_positive_samples(inter, drugs, targets)
        assert len(positives) == len(inter)
        assert positives.class_counts == (len(inter), 0)

    def test_empty_interactions(self, planted):
        _, drugs, targets, _ = planted
        empty = InteractionSet(pairs=(), drug_indices=np.array([], dtype=int),
                               target_indices=np.array([], dtype=int))
        positives = build_positive_samples(empty, drugs, targets)
        assert len(positives) == 0
        assert positives.dim == drugs.dim + targets.dim

    def test_single_interaction_features(self, planted):
        _, drugs, targets, inter = planted
        one = interactions_from([inter.pairs[0]], drugs, targets)
        positives = build_positive_samples(one, drugs, targets)
        d, t = inter.pairs[0]
        np.testing.assert_array_equal(positives.features[0, : drugs.dim], drugs.row(d))
        np.testing.assert_array_equal(positives.features[0, drugs.dim :], targets.row(t))


class TestGenerateCandidates:
    def test_no_overlap_with_approved(self, planted):
        _, drugs, targets, inter = planted
        pool = generate_candidates(inter, drugs, targets, k=7, k_range=range(2, 6), seed=1)
        approved = set(inter.pairs)
        assert not (set(pool.candidates.keys()) & approved)

    def test_candidates_negative_and_unique(self, planted):
        _, drugs, targets, inter = planted
        pool = generate_candidates(inter, drugs, targets, k=7, k_range=range(2, 6), seed=1)
        assert (pool.candidates.labels == 0).all()
        keys = pool.candidates.keys()
        assert len(keys) == len(set(keys))

    def test_provenance_references_sources(self, planted):
        _, drugs, targets, inter = planted
        pool = generate_candidates(inter, drugs, targets, k=7, k_range=range(2, 6), seed=1)
        approved = set(inter.pairs)
        assert len(pool.provenance) == len(pool.candidates)
        for drug, target, src_drug, src_target in pool.provenance:
            assert (src_drug, src_target) in approved

    def test_reduction_on_full_scale_fixture(self):
        # the 10x bound holds at benchmark scale; tiny complements do not
        # leave enough room for it
        data = make_planted_data(seed=7)
        drugs = min_max_normalize(data.drugs)
        targets = min_max_normalize(data.targets)
        inter = interactions_from(data.interactions, drugs, targets)
        pool = generate_candidates(inter, drugs, targets, k=11, k_range=range(2, 11), seed=1)
        complement = drugs.n * targets.n - len(inter)
        assert len(pool.candidates) * 10 <= complement

    def test_deterministic_candidate_order(self, planted):
        _, drugs, targets, inter = planted
        a = generate_candidates(inter, drugs, targets, k=7, k_range=range(2, 6), seed=5)
        b = generate_candidates(inter, drugs, targets, k=7, k_range=range(2, 6), seed=5)
        assert a.candidates.keys() == b.candidates.keys()

    def test_empty_shared_nn_contributes_nothing(self):
        # 1-D points 0, 1, 10: NN_1 sets are {1}, {0}, {1}; entity 1's
        # shared set is empty, so its interactions yield no candidates
        drugs = FeatureMatrix.build(["a", "b", "c"], [[0.0], [1.0], [10.0]], ["f"])
        targets = FeatureMatrix.build(["x", "y", "z"], [[0.0], [0.5], [1.0]], ["g"])
        inter = interactions_from([("b", "y")], drugs, targets)
        pool = generate_candidates(inter, drugs, targets, k=1, k_range=range(2, 4), seed=0)
        assert len(pool.candidates) == 0

    def test_too_few_entities_rejected(self, planted):
        _, drugs, targets, inter = planted
        with pytest.raises(InvalidInput):
            generate_candidates(inter, drugs, targets, k=drugs.n, k_range=range(2, 4), seed=0)

    def test_candidate_count_bounded_by_rep_products(self, planted):
        # dedup only removes: candidates <= sum over interactions of
        # |drug reps| x |target reps|
        _, drugs, targets, inter = planted
        from fuzzydti.clustering import optimal_kmedoids_indices
        from fuzzydti.neighbors import knn_table, pairwise_distances, shared_nn_sets

        pool = generate_candidates(inter, drugs, targets, k=7, k_range=range(2, 6), seed=1)
        d_snn = shared_nn_sets(knn_table(pairwise_distances(drugs), 7))
        t_snn = shared_nn_sets(knn_table(pairwise_distances(targets), 7))
        total = 0
        for di, ti in zip(inter.drug_indices, inter.target_indices):
            nd = len(optimal_kmedoids_indices(drugs.values[d_snn[di]], range(2, 6))) if d_snn[di].size else 0
            nt = len(optimal_kmedoids_indices(targets.values[t_snn[ti]], range(2, 6))) if t_snn[ti].size else 0
            total += nd * nt
        assert len(pool.candidates) <= total


class TestAssemblePool:
    def test_counts_add_up(self, planted):
        _, drugs, targets, inter = planted
        pool = generate_candidates(inter, drugs, targets, k=7, k_range=range(2, 6), seed=1)
        combined = assemble_training_pool(pool.positives, pool.candidates)
        assert len(combined) == len(pool.positives) + len(pool.candidates)
        assert combined.class_counts == (len(pool.positives), len(pool.candidates))

    def test_empty_candidates(self, planted):
        _, drugs, targets, inter = planted
        positives = build_positive_samples(inter, drugs, targets)
        empty = positives.subset(np.array([], dtype=int))
        assert assemble_training_pool(positives, empty) is positives

    def test_key_overlap_rejected(self, planted):
        _, drugs, targets, inter = planted
        positives = build_positive_samples(inter, drugs, targets)
        with pytest.raises(DuplicatePair):
            assemble_training_pool(positives, positives)

    def test_dim_mismatch_rejected(self, planted):
        _, drugs, targets, inter = planted
        positives = build_positive_samples(inter, drugs, targets)
        from conftest import make_pair_dataset

        other = make_pair_dataset(np.zeros((2, 3)), np.zeros(2))
        with pytest.raises(InvalidInput):
            assemble_training_pool(positives, other)
