"""Domain types for the prediction pipeline plus normalization, pair
concatenation, deterministic group splitting, and seed substreams.

All types are immutable after construction (arrays are set read-only), so
they are safe to share across worker threads.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DuplicatePair, InvalidInput

STAT_TOL = 1e-12


def substream_seed(seed: int, label: str) -> int:
    """Derive a named 64-bit child seed from a master seed.

    Stable across platforms and processes, so stage-level reruns draw the
    same random stream as a full pipeline run.
    """
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def rng_for(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng(substream_seed(seed, label))


class Label(Enum):
    POSITIVE = 1
    NEGATIVE = 0
    UNANNOTATED = -1


@dataclass(frozen=True)
class FeatureStats:
    """Per-feature min, max and population variance."""

    mins: np.ndarray
    maxs: np.ndarray
    variances: np.ndarray

    @classmethod
    def from_values(cls, values: np.ndarray) -> "FeatureStats":
        return cls(
            mins=values.min(axis=0),
            maxs=values.max(axis=0),
            variances=values.var(axis=0),
        )


@dataclass(frozen=True)
class FeatureMatrix:
    """Row-indexed entity features (drugs or targets).

    ids are opaque tokens (e.g. "DB04094", "Q9Y296"), unique and non-empty.
    values is a dense n x d float matrix with no NaN/Inf.
    """

    ids: tuple[str, ...]
    values: np.ndarray
    feature_names: tuple[str, ...]
    feature_stats: FeatureStats = field(repr=False)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidInput("feature values must be a 2-D matrix")
        n, d = values.shape
        if len(self.ids) != n:
            raise InvalidInput(f"{len(self.ids)} ids for {n} rows")
        if len(self.feature_names) != d:
            raise InvalidInput(f"{len(self.feature_names)} names for {d} features")
        if any(not i for i in self.ids):
            raise InvalidInput("entity ids must be non-empty")
        if len(set(self.ids)) != n:
            raise InvalidInput("entity ids must be unique")
        if n and not np.isfinite(values).all():
            raise InvalidInput("feature values must be finite")
        if n:
            fresh = FeatureStats.from_values(values)
            for got, expect in (
                (self.feature_stats.mins, fresh.mins),
                (self.feature_stats.maxs, fresh.maxs),
                (self.feature_stats.variances, fresh.variances),
            ):
                if np.abs(np.asarray(got) - expect).max() > STAT_TOL:
                    raise InvalidInput("feature_stats inconsistent with values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def build(cls, ids, values, feature_names) -> "FeatureMatrix":
        """Construct with stats recomputed from the values."""
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.size == 0:
            raise InvalidInput("cannot build an empty feature matrix")
        return cls(
            ids=tuple(ids),
            values=values,
            feature_names=tuple(feature_names),
            feature_stats=FeatureStats.from_values(values),
        )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def index_of(self) -> dict[str, int]:
        return {eid: i for i, eid in enumerate(self.ids)}

    def row(self, entity_id: str) -> np.ndarray:
        return self.values[self.index_of()[entity_id]]


@dataclass(frozen=True)
class InteractionSet:
    """Approved (drug_id, target_id) pairs with indices resolved against
    their source matrices. Duplicates are dropped at load time."""

    pairs: tuple[tuple[str, str], ...]
    drug_indices: np.ndarray
    target_indices: np.ndarray
    n_duplicates_dropped: int = 0

    def __post_init__(self):
        for name in ("drug_indices", "target_indices"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class PairSample:
    drug: str
    target: str
    features: np.ndarray
    label: Label
    frua_score: float | None = None
    synthetic: bool = False


class PairDataset:
    """Column-major store of pair samples: one features matrix plus parallel
    key/label/score arrays. Duplicate (drug, target) keys are rejected.
    """

    def __init__(
        self,
        drug_ids: list[str],
        target_ids: list[str],
        features: np.ndarray,
        labels: np.ndarray,
        frua_scores: np.ndarray | None = None,
        synthetic: np.ndarray | None = None,
    ):
        n = len(drug_ids)
        features = np.ascontiguousarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] != n or len(target_ids) != n:
            raise InvalidInput("pair dataset arrays disagree on sample count")
        labels = np.asarray(labels, dtype=np.int8)
        if labels.shape != (n,):
            raise InvalidInput("labels must align with samples")
        keys = set(zip(drug_ids, target_ids))
        if len(keys) != n:
            raise DuplicatePair("duplicate (drug, target) key in pair dataset")
        self.drug_ids = list(drug_ids)
        self.target_ids = list(target_ids)
        self.features = features
        self.labels = labels
        self.frua_scores = None if frua_scores is None else np.asarray(frua_scores, float)
        self.synthetic = (
            np.zeros(n, dtype=bool) if synthetic is None else np.asarray(synthetic, bool)
        )
        self.features.setflags(write=False)
        self.labels.setflags(write=False)
        self.synthetic.setflags(write=False)
        if self.frua_scores is not None:
            self.frua_scores.setflags(write=False)

    def __len__(self) -> int:
        return len(self.drug_ids)

    def __getitem__(self, i: int) -> PairSample:
        score = None
        if self.frua_scores is not None and np.isfinite(self.frua_scores[i]):
            score = float(self.frua_scores[i])
        return PairSample(
            drug=self.drug_ids[i],
            target=self.target_ids[i],
            features=self.features[i],
            label=Label(int(self.labels[i])),
            frua_score=score,
            synthetic=bool(self.synthetic[i]),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def class_counts(self) -> tuple[int, int]:
        """(positive count, negative count)."""
        pos = int(np.sum(self.labels == Label.POSITIVE.value))
        neg = int(np.sum(self.labels == Label.NEGATIVE.value))
        return pos, neg

    def keys(self) -> list[tuple[str, str]]:
        return list(zip(self.drug_ids, self.target_ids))

    def subset(self, indices) -> "PairDataset":
        indices = np.asarray(indices, dtype=int)
        return PairDataset(
            [self.drug_ids[i] for i in indices],
            [self.target_ids[i] for i in indices],
            self.features[indices],
            self.labels[indices],
            None if self.frua_scores is None else self.frua_scores[indices],
            self.synthetic[indices],
        )

    @classmethod
    def from_samples(cls, samples: list[PairSample]) -> "PairDataset":
        if not samples:
            raise InvalidInput("cannot build a pair dataset from zero samples")
        feats = np.vstack([s.features for s in samples])
        scores = np.array(
            [np.nan if s.frua_score is None else s.frua_score for s in samples]
        )
        return cls(
            [s.drug for s in samples],
            [s.target for s in samples],
            feats,
            np.array([s.label.value for s in samples], dtype=np.int8),
            scores,
            np.array([s.synthetic for s in samples], dtype=bool),
        )

    @classmethod
    def concatenate(cls, first: "PairDataset", second: "PairDataset") -> "PairDataset":
        if len(second) == 0:
            return first
        if first.dim != second.dim:
            raise InvalidInput(
                f"pair dims differ: {first.dim} vs {second.dim}"
            )

        def scores_of(ds):
            if ds.frua_scores is not None:
                return ds.frua_scores
            return np.full(len(ds), np.nan)

        return cls(
            first.drug_ids + second.drug_ids,
            first.target_ids + second.target_ids,
            np.vstack([first.features, second.features]),
            np.concatenate([first.labels, second.labels]),
            np.concatenate([scores_of(first), scores_of(second)]),
            np.concatenate([first.synthetic, second.synthetic]),
        )


@dataclass(frozen=True)
class GroupSplit:
    """Partition of sample indices into near-equal groups."""

    group_assignments: np.ndarray
    group_count: int
    seed: int

    def members(self, group: int) -> np.ndarray:
        return np.flatnonzero(self.group_assignments == group)


def min_max_normalize(matrix: FeatureMatrix) -> FeatureMatrix:
    """Map each feature column through (v - min) / (max - min).

    Constant columns map to 0 everywhere; with a zero range any other choice
    would divide by zero or leave the column outside [0, 1].
    """
    if matrix.n == 0:
        raise InvalidInput("cannot normalize an empty matrix")
    values = matrix.values
    mins = values.min(axis=0)
    spans = values.max(axis=0) - mins
    constant = spans == 0
    safe_spans = np.where(constant, 1.0, spans)
    normalized = (values - mins) / safe_spans
    normalized[:, constant] = 0.0
    return FeatureMatrix.build(matrix.ids, normalized, matrix.feature_names)


def concat_pair(
    drug_row: np.ndarray,
    target_row: np.ndarray,
    drug_id: str,
    target_id: str,
    label: Label,
) -> PairSample:
    """Concatenate a drug row and a target row, drug features first."""
    drug_row = np.asarray(drug_row, dtype=np.float64).ravel()
    target_row = np.asarray(target_row, dtype=np.float64).ravel()
    if drug_row.size == 0 or target_row.size == 0:
        raise InvalidInput("pair concatenation needs non-empty rows on both sides")
    return PairSample(
        drug=drug_id,
        target=target_id,
        features=np.concatenate([drug_row, target_row]),
        label=label,
    )


def split_into_groups(n_samples: int, group_count: int, seed: int) -> GroupSplit:
    """Seeded shuffle followed by round-robin assignment.

    Group sizes differ by at most one; assignments are a function of
    (n_samples, group_count, seed) only.
    """
    if n_samples < 1:
        raise InvalidInput("need at least one sample to split")
    if not 1 <= group_count <= n_samples:
        raise InvalidInput(
            f"group_count must be in [1, {n_samples}], got {group_count}"
        )
    order = np.random.default_rng(seed).permutation(n_samples)
    assignments = np.empty(n_samples, dtype=np.int64)
    assignments[order] = np.arange(n_samples) % group_count
    assignments.setflags(write=False)
    return GroupSplit(assignments, group_count, seed)
