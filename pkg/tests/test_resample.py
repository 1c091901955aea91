import numpy as np
import pytest

from fuzzydti.coredata import Label
from fuzzydti.errors import EmptyNegativeClass, InvalidInput, MissingScore
from fuzzydti.fuzzyrough import FruaScoreTable
from fuzzydti.resample import ThresholdPolicy, adasyn, balance, threshold_partition
from conftest import make_pair_dataset


def scored_candidates(scores, prefix="c"):
    scores = np.asarray(scores, dtype=float)
    ds = make_pair_dataset(np.linspace(0, 1, len(scores)).reshape(-1, 1), np.zeros(len(scores)), prefix=prefix)
    table = FruaScoreTable(keys=ds.keys(), degrees=scores, m_used=1)
    return ds, table


class TestThresholdPolicy:
    def test_invariant_enforced(self):
        with pytest.raises(InvalidInput):
            ThresholdPolicy(t_p=0.2, t_q=0.8)

    def test_bounds_enforced(self):
        with pytest.raises(InvalidInput):
            ThresholdPolicy(t_p=1.2, t_q=0.1)


class TestThresholdPartition:
    def test_counts_direct_comparison(self):
        ds, table = scored_candidates([0.9, 0.5, 0.1])
        promoted, retained, discarded = threshold_partition(
            table, ds, ThresholdPolicy(t_p=0.8, t_q=0.2)
        )
        assert (len(promoted), len(retained), len(discarded)) == (1, 1, 1)
        assert promoted.labels.tolist() == [1]
        assert retained.labels.tolist() == [0]

    def test_equal_thresholds_promote_boundary(self):
        ds, table = scored_candidates([0.5, 0.4999, 0.5001])
        promoted, retained, discarded = threshold_partition(
            table, ds, ThresholdPolicy(t_p=0.5, t_q=0.5)
        )
        assert len(discarded) == 0
        assert len(promoted) == 2  # 0.5 and 0.5001: >= checked first
        assert len(retained) == 1

    def test_extreme_policy_counts(self):
        ds, table = scored_candidates([1.0, 0.9, 0.5, 0.0])
        promoted, retained, discarded = threshold_partition(
            table, ds, ThresholdPolicy(t_p=1.0, t_q=0.0)
        )
        assert (len(promoted), len(retained), len(discarded)) == (1, 1, 2)

    def test_partition_is_exhaustive_and_disjoint(self, rng):
        degrees = rng.random(50)
        ds, table = scored_candidates(degrees)
        promoted, retained, discarded = threshold_partition(
            table, ds, ThresholdPolicy(t_p=0.7, t_q=0.3)
        )
        keys = promoted.keys() + retained.keys() + discarded.keys()
        assert len(keys) == 50 and len(set(keys)) == 50

    def test_monotone_in_thresholds(self, rng):
        degrees = rng.random(80)
        ds, table = scored_candidates(degrees)
        retained_sizes = []
        promoted_sizes = []
        for tq in (0.1, 0.3, 0.5):
            _p, retained, _d = threshold_partition(table, ds, ThresholdPolicy(0.9, tq))
            retained_sizes.append(len(retained))
        for tp in (0.5, 0.7, 0.9):
            promoted, _r, _d = threshold_partition(table, ds, ThresholdPolicy(tp, 0.1))
            promoted_sizes.append(len(promoted))
        assert retained_sizes == sorted(retained_sizes)
        assert promoted_sizes == sorted(promoted_sizes, reverse=True)

    def test_missing_score_rejected(self):
        ds, _ = scored_candidates([0.5, 0.6])
        table = FruaScoreTable(keys=ds.keys()[:1], degrees=np.array([0.5]), m_used=1)
        with pytest.raises(MissingScore):
            threshold_partition(table, ds, ThresholdPolicy(0.8, 0.2))

    def test_scores_kept_for_audit(self):
        ds, table = scored_candidates([0.95, 0.05])
        promoted, retained, _ = threshold_partition(table, ds, ThresholdPolicy(0.9, 0.1))
        assert promoted.frua_scores.tolist() == [0.95]
        assert retained.frua_scores.tolist() == [0.05]


def imbalanced_dataset(n_min=10, n_maj=90, seed=0, gap=2.0):
    gen = np.random.default_rng(seed)
    X = np.vstack([gen.random((n_min, 3)) + gap, gen.random((n_maj, 3))])
    y = np.concatenate([np.ones(n_min, dtype=int), np.zeros(n_maj, dtype=int)])
    return make_pair_dataset(X, y)


class TestAdasyn:
    def test_balanced_is_noop(self, rng):
        ds = make_pair_dataset(rng.random((20, 2)), [1] * 10 + [0] * 10)
        out = adasyn(ds, beta=1.0, K=3, seed=1)
        assert len(out.dataset) == 20
        assert out.report.generated.sum() == 0

    def test_counting_bounds_90_10(self):
        ds = imbalanced_dataset(10, 90, gap=0.0)  # interleaved classes
        out = adasyn(ds, beta=1.0, K=5, seed=2)
        total = int(out.report.generated.sum())
        assert 80 - 10 <= total <= 80 + 10
        pos, neg = out.dataset.class_counts
        assert abs(pos - neg) <= 10

    def test_interior_fallback_uniform(self):
        # minority far from majority: every K-neighbourhood is pure minority
        ds = imbalanced_dataset(12, 60, gap=10.0)
        out = adasyn(ds, beta=1.0, K=3, seed=3)
        assert out.report.generated.tolist() == [4] * 12  # round(48 / 12)

    def test_synthetics_lie_between_parents(self):
        ds = imbalanced_dataset(8, 40, gap=0.5)
        out = adasyn(ds, beta=1.0, K=4, seed=4)
        synth_rows = out.dataset.features[out.dataset.synthetic]
        assert len(synth_rows) == len(out.report.parents)
        for row, (i, z) in zip(synth_rows, out.report.parents):
            lo = np.minimum(ds.features[i], ds.features[z])
            hi = np.maximum(ds.features[i], ds.features[z])
            assert (row >= lo).all() and (row <= hi).all()

    def test_deterministic_bitwise(self):
        ds = imbalanced_dataset(9, 50, gap=0.3)
        a = adasyn(ds, beta=1.0, K=5, seed=11)
        b = adasyn(ds, beta=1.0, K=5, seed=11)
        np.testing.assert_array_equal(a.dataset.features, b.dataset.features)
        assert a.dataset.drug_ids == b.dataset.drug_ids

    def test_single_class_rejected(self, rng):
        ds = make_pair_dataset(rng.random((5, 2)), np.ones(5))
        with pytest.raises(InvalidInput):
            adasyn(ds, beta=1.0, K=3, seed=0)

    def test_beta_zero_generates_nothing(self):
        ds = imbalanced_dataset(5, 50)
        out = adasyn(ds, beta=0.0, K=3, seed=0)
        assert out.report.generated.sum() == 0


class TestBalance:
    def run_balance(self, pos_feats, cand_feats, degrees, tp=0.8, tq=0.2, seed=5):
        positives = make_pair_dataset(pos_feats, np.ones(len(pos_feats)), prefix="p")
        candidates = make_pair_dataset(cand_feats, np.zeros(len(cand_feats)), prefix="c")
        table = FruaScoreTable(keys=candidates.keys(), degrees=np.asarray(degrees, float), m_used=1)
        return balance(positives, candidates, table, ThresholdPolicy(tp, tq), beta=1.0, K=3, seed=seed)

    def test_near_equal_classes_nearly_noop(self, rng):
        pos = rng.random((20, 2))
        cand = rng.random((25, 2))
        degrees = np.full(25, 0.1)  # all retained
        out = self.run_balance(pos, cand, degrees)
        assert out.report.generated.sum() <= 20  # slack bounded by minority seeds
        pos_n, neg_n = out.dataset.class_counts
        assert abs(pos_n - neg_n) <= 20

    def test_many_retained_synthesizes_positives(self, rng):
        pos = rng.random((10, 2)) + 1.5
        cand = rng.random((60, 2))
        out = self.run_balance(pos, cand, np.full(60, 0.05))
        assert out.minority_label == Label.POSITIVE.value
        synth_labels = out.dataset.labels[out.dataset.synthetic]
        assert (synth_labels == 1).all() and len(synth_labels) > 0

    def test_few_retained_synthesizes_negatives(self, rng):
        pos = rng.random((40, 2)) + 1.5
        cand = rng.random((12, 2))
        out = self.run_balance(pos, cand, np.full(12, 0.05))
        assert out.minority_label == Label.NEGATIVE.value
        synth_labels = out.dataset.labels[out.dataset.synthetic]
        assert (synth_labels == 0).all() and len(synth_labels) > 0

    def test_promoted_join_positive_class(self, rng):
        pos = rng.random((10, 2))
        cand = rng.random((30, 2))
        degrees = np.concatenate([np.full(15, 0.9), np.full(15, 0.1)])
        out = self.run_balance(pos, cand, degrees)
        originals = out.dataset.subset(np.flatnonzero(~out.dataset.synthetic))
        pos_n, neg_n = originals.class_counts
        assert pos_n == 25 and neg_n == 15

    def test_empty_retained_rejected(self, rng):
        pos = rng.random((10, 2))
        cand = rng.random((10, 2))
        with pytest.raises(EmptyNegativeClass):
            self.run_balance(pos, cand, np.full(10, 0.5))
