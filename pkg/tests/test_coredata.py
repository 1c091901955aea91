import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzydti.coredata import (
    FeatureMatrix,
    Label,
    PairDataset,
    concat_pair,
    min_max_normalize,
    split_into_groups,
    substream_seed,
)
from fuzzydti.errors import DuplicatePair, InvalidInput


def matrix_from_columns(*cols):
    values = np.column_stack(cols)
    ids = [f"e{i}" for i in range(values.shape[0])]
    return FeatureMatrix.build(ids, values, [f"f{j}" for j in range(values.shape[1])])


class TestMinMaxNormalize:
    def test_endpoints_and_midpoint(self):
        out = min_max_normalize(matrix_from_columns([2.0, 4.0, 6.0]))
        assert out.values[:, 0].tolist() == [0.0, 0.5, 1.0]

    def test_constant_column_maps_to_zero(self):
        out = min_max_normalize(matrix_from_columns([5.0, 5.0, 5.0]))
        assert out.values[:, 0].tolist() == [0.0, 0.0, 0.0]

    def test_two_point_range(self):
        out = min_max_normalize(matrix_from_columns([0.1, 0.9]))
        assert out.values[:, 0].tolist() == [0.0, 1.0]

    def test_stats_are_recomputed(self):
        out = min_max_normalize(matrix_from_columns([2.0, 4.0, 6.0], [1.0, 1.0, 1.0]))
        assert out.feature_stats.mins.tolist() == [0.0, 0.0]
        assert out.feature_stats.maxs.tolist() == [1.0, 0.0]
        np.testing.assert_allclose(out.feature_stats.variances, out.values.var(axis=0))

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(
            st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=3),
            min_size=2,
            max_size=12,
        )
    )
    def test_idempotent(self, rows):
        once = min_max_normalize(
            FeatureMatrix.build(
                [f"e{i}" for i in range(len(rows))], np.array(rows), ["a", "b", "c"]
            )
        )
        twice = min_max_normalize(once)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-12)
        assert once.values.min() >= 0.0 and once.values.max() <= 1.0

    def test_empty_matrix_rejected(self):
        with pytest.raises(InvalidInput):
            FeatureMatrix.build([], np.empty((0, 2)), ["a", "b"])


class TestFeatureMatrixInvariants:
    def test_rejects_nan(self):
        with pytest.raises(InvalidInput):
            matrix_from_columns([1.0, float("nan")])

    def test_rejects_duplicate_ids(self):
        with pytest.raises(InvalidInput):
            FeatureMatrix.build(["x", "x"], [[1.0], [2.0]], ["f"])

    def test_rejects_mismatched_names(self):
        with pytest.raises(InvalidInput):
            FeatureMatrix.build(["a", "b"], [[1.0], [2.0]], ["f", "g"])


class TestConcatPair:
    def test_order_preserved(self):
        sample = concat_pair([0.2], [0.7], "d", "t", Label.POSITIVE)
        assert sample.features.tolist() == [0.2, 0.7]

    @pytest.mark.parametrize("d_drug,d_target,expected", [(193, 1290, 1483), (881, 876, 1757)])
    def test_reference_dataset_dims(self, d_drug, d_target, expected):
        sample = concat_pair(np.zeros(d_drug), np.zeros(d_target), "d", "t", Label.POSITIVE)
        assert sample.features.shape == (expected,)

    def test_drug_prefix_round_trip(self, rng):
        drug = rng.random(7)
        target = rng.random(5)
        sample = concat_pair(drug, target, "d", "t", Label.NEGATIVE)
        np.testing.assert_array_equal(sample.features[:7], drug)
        np.testing.assert_array_equal(sample.features[7:], target)

    def test_zero_dim_rejected(self):
        with pytest.raises(InvalidInput):
            concat_pair([], [0.1], "d", "t", Label.POSITIVE)


class TestGroupSplit:
    def test_single_group(self):
        split = split_into_groups(10, 1, 0)
        assert set(split.group_assignments.tolist()) == {0}

    def test_balanced_sizes(self):
        split = split_into_groups(10, 3, 7)
        sizes = sorted(np.bincount(split.group_assignments).tolist(), reverse=True)
        assert sizes == [4, 3, 3]

    def test_deterministic(self):
        a = split_into_groups(10, 3, 11)
        b = split_into_groups(10, 3, 11)
        np.testing.assert_array_equal(a.group_assignments, b.group_assignments)

    def test_partition(self):
        split = split_into_groups(23, 4, 3)
        members = [split.members(g) for g in range(4)]
        combined = np.sort(np.concatenate(members))
        np.testing.assert_array_equal(combined, np.arange(23))

    def test_bad_group_count(self):
        with pytest.raises(InvalidInput):
            split_into_groups(3, 4, 0)


class TestPairDataset:
    def test_duplicate_key_rejected(self):
        with pytest.raises(DuplicatePair):
            PairDataset(["d", "d"], ["t", "t"], np.zeros((2, 2)), np.zeros(2, dtype=np.int8))

    def test_class_counts(self):
        ds = PairDataset(
            ["a", "b", "c"], ["x", "y", "z"], np.zeros((3, 1)), np.array([1, 0, 1], dtype=np.int8)
        )
        assert ds.class_counts == (2, 1)

    def test_concatenate_checks_dim(self):
        a = PairDataset(["a"], ["x"], np.zeros((1, 2)), np.ones(1, dtype=np.int8))
        b = PairDataset(["b"], ["y"], np.zeros((1, 3)), np.zeros(1, dtype=np.int8))
        with pytest.raises(InvalidInput):
            PairDataset.concatenate(a, b)


def test_substream_seeds_are_stable_and_distinct():
    assert substream_seed(42, "score") == substream_seed(42, "score")
    assert substream_seed(42, "score") != substream_seed(42, "balance")
    assert substream_seed(42, "score") != substream_seed(43, "score")
