"""Fuzzy-rough scoring core: similarity kernels, Lukasiewicz connectives,
indiscernibility aggregation, lower/upper approximations, and group-averaged
upper-approximation degrees for candidate pairs.

A decision table holds feature rows plus a crisp 0/1 decision. The fuzzy
indiscernibility of two rows aggregates per-feature similarities with a
t-norm; approximations then take sup/inf of T(relation, membership) and
I(relation, membership) over the table. Per-table cost is Theta(rows^2 * d),
which is why callers reduce dimension first and evaluate in groups.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .coredata import PairDataset, split_into_groups, substream_seed
from .errors import EmptyConcept, InvalidInput

_QUERY_CHUNK = 64
_FEATURE_CHUNK = 32


def _check_unit(*values) -> None:
    for v in values:
        arr = np.asarray(v, dtype=float)
        if arr.size and (not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0):
            raise InvalidInput("degrees must lie in [0, 1]")


def lukasiewicz_t(a, b):
    """max(0, a + b - 1)."""
    _check_unit(a, b)
    return np.maximum(0.0, np.asarray(a, float) + np.asarray(b, float) - 1.0)


def lukasiewicz_i(a, b):
    """min(1, 1 - a + b)."""
    _check_unit(a, b)
    return np.minimum(1.0, 1.0 - np.asarray(a, float) + np.asarray(b, float))


def min_t(a, b):
    _check_unit(a, b)
    return np.minimum(np.asarray(a, float), np.asarray(b, float))


@dataclass(frozen=True)
class Connectives:
    """A t-norm / implicator pair. The t-norm drives both the feature
    aggregation and the upper approximation; the implicator is always the
    Lukasiewicz one (its residuum)."""

    name: str
    t_norm: callable
    implicator: callable

    @classmethod
    def lukasiewicz(cls) -> "Connectives":
        return cls("lukasiewicz", lukasiewicz_t, lukasiewicz_i)

    @classmethod
    def min_norm(cls) -> "Connectives":
        return cls("min", min_t, lukasiewicz_i)

    @classmethod
    def by_name(cls, name: str) -> "Connectives":
        if name == "lukasiewicz":
            return cls.lukasiewicz()
        if name == "min":
            return cls.min_norm()
        raise InvalidInput(f"unknown t-norm {name!r}")


KERNEL_KINDS = ("linear", "gaussian", "triangular")


@dataclass(frozen=True)
class SimilarityKernel:
    """Per-feature fuzzy similarity with stats taken from a decision table.

    linear:     1 - |x - y| / (max - min)
    gaussian:   exp(-(x - y)^2 / (2 sigma^2))
    triangular: max(1 - |x - y| / sigma, 0)

    A feature with zero range (or zero variance) is constant in the table;
    its similarity degenerates to 1 for equal values and 0 otherwise, the
    pointwise limit of each formula. Outputs are clamped to [0, 1].
    """

    kind: str
    mins: np.ndarray
    maxs: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InvalidInput(f"unknown kernel {self.kind!r}")

    @classmethod
    def from_rows(cls, kind: str, rows: np.ndarray) -> "SimilarityKernel":
        rows = np.asarray(rows, dtype=np.float64)
        return cls(kind, rows.min(axis=0), rows.max(axis=0), rows.var(axis=0))

    def block(self, queries: np.ndarray, rows: np.ndarray, feat) -> np.ndarray:
        """Similarities for a feature slice: (q, t, f) tensor."""
        diff = queries[:, None, :] - rows[None, :, :]
        if self.kind == "linear":
            span = self.maxs[feat] - self.mins[feat]
            degenerate = span == 0
            sims = 1.0 - np.abs(diff) / np.where(degenerate, 1.0, span)
        elif self.kind == "gaussian":
            var = self.variances[feat]
            degenerate = var == 0
            sims = np.exp(-(diff**2) / (2.0 * np.where(degenerate, 1.0, var)))
        else:  # triangular
            sigma = np.sqrt(self.variances[feat])
            degenerate = sigma == 0
            sims = 1.0 - np.abs(diff) / np.where(degenerate, 1.0, sigma)
        if degenerate.any():
            sims[..., degenerate] = (diff[..., degenerate] == 0).astype(float)
        return np.clip(sims, 0.0, 1.0)

    def feature_similarity(self, xf: float, yf: float, feature: int) -> float:
        if not (np.isfinite(xf) and np.isfinite(yf)):
            raise InvalidInput("feature values must be finite")
        q = np.array([[xf]], dtype=float)
        r = np.array([[yf]], dtype=float)
        return float(self.block(q, r, np.array([feature]))[0, 0, 0])


@dataclass(frozen=True)
class DecisionTable:
    """Conditional attribute rows plus one crisp binary decision column."""

    rows: np.ndarray
    decisions: np.ndarray
    feature_subset: np.ndarray | None = None

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.float64)
        decisions = np.asarray(self.decisions, dtype=np.int8)
        if rows.ndim != 2 or rows.shape[0] == 0:
            raise InvalidInput("decision table needs at least one row")
        if decisions.shape != (rows.shape[0],):
            raise InvalidInput("one decision per row required")
        if not np.isin(decisions, (0, 1)).all():
            raise InvalidInput("decisions must be crisp 0/1")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "decisions", decisions)
        if self.feature_subset is not None:
            subset = np.asarray(self.feature_subset, dtype=int)
            if subset.size == 0:
                raise InvalidInput("feature subset must be non-empty")
            object.__setattr__(self, "feature_subset", subset)

    @property
    def active_features(self) -> np.ndarray:
        if self.feature_subset is not None:
            return self.feature_subset
        return np.arange(self.rows.shape[1])

    def kernel(self, kind: str) -> SimilarityKernel:
        return SimilarityKernel.from_rows(kind, self.rows)


@dataclass(frozen=True)
class FruaScoreTable:
    """Averaged upper-approximation degree per candidate pair."""

    keys: list[tuple[str, str]]
    degrees: np.ndarray
    m_used: int

    def __post_init__(self):
        degrees = np.asarray(self.degrees, dtype=np.float64)
        if len(self.keys) != degrees.shape[0]:
            raise InvalidInput("one degree per key required")
        if degrees.size and (
            not np.isfinite(degrees).all() or degrees.min() < 0 or degrees.max() > 1
        ):
            raise InvalidInput("degrees must be finite within [0, 1]")
        object.__setattr__(self, "degrees", degrees)

    def as_mapping(self) -> dict[tuple[str, str], float]:
        return dict(zip(self.keys, map(float, self.degrees)))


def _relation_block(
    kernel: SimilarityKernel,
    connectives: Connectives,
    queries: np.ndarray,
    rows: np.ndarray,
    features: np.ndarray,
) -> np.ndarray:
    """Aggregated indiscernibility matrix (queries x rows) for the given
    feature subset, chunked so no intermediate exceeds a few dozen MB."""
    n_features = len(features)
    out = np.empty((queries.shape[0], rows.shape[0]), dtype=np.float64)
    for qs in range(0, queries.shape[0], _QUERY_CHUNK):
        qblock = queries[qs : qs + _QUERY_CHUNK]
        if connectives.name == "lukasiewicz":
            acc = np.zeros((qblock.shape[0], rows.shape[0]))
            for fs in range(0, n_features, _FEATURE_CHUNK):
                feat = features[fs : fs + _FEATURE_CHUNK]
                acc += kernel.block(qblock[:, feat], rows[:, feat], feat).sum(axis=2)
            mu = np.clip(acc - (n_features - 1), 0.0, 1.0)
        elif connectives.name == "min":
            mu = np.ones((qblock.shape[0], rows.shape[0]))
            for fs in range(0, n_features, _FEATURE_CHUNK):
                feat = features[fs : fs + _FEATURE_CHUNK]
                sims = kernel.block(qblock[:, feat], rows[:, feat], feat)
                np.minimum(mu, sims.min(axis=2), out=mu)
        else:  # generic fold, only reachable with custom connectives
            mu = None
            for f in features:
                sims = kernel.block(qblock[:, [f]], rows[:, [f]], np.array([f]))[:, :, 0]
                mu = sims if mu is None else connectives.t_norm(mu, sims)
        out[qs : qs + qblock.shape[0]] = mu
    return out


def relation_matrix(
    queries: np.ndarray,
    table: DecisionTable,
    kernel: SimilarityKernel,
    connectives: Connectives,
) -> np.ndarray:
    """Aggregated indiscernibility degrees, one row per query, one column
    per table row."""
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    return _relation_block(kernel, connectives, queries, table.rows, table.active_features)


def indiscernibility(
    x: np.ndarray,
    y: np.ndarray,
    table: DecisionTable,
    kernel: SimilarityKernel,
    connectives: Connectives,
) -> float:
    """Per-feature similarities folded left-to-right with the t-norm."""
    features = table.active_features
    if features.size == 0:
        raise InvalidInput("indiscernibility over an empty feature set")
    x = np.asarray(x, float).ravel()
    y = np.asarray(y, float).ravel()
    if x.shape[0] != table.rows.shape[1] or y.shape[0] != table.rows.shape[1]:
        raise InvalidInput("query dimension does not match the table")
    degree = None
    for f in features:
        sim = kernel.feature_similarity(float(x[f]), float(y[f]), int(f))
        degree = sim if degree is None else float(connectives.t_norm(degree, sim))
    return float(degree)


def _membership(table: DecisionTable, concept_label: int) -> np.ndarray:
    return (table.decisions == concept_label).astype(np.float64)


def upper_approximation_batch(
    queries: np.ndarray,
    table: DecisionTable,
    concept_label: int,
    kernel: SimilarityKernel,
    connectives: Connectives,
) -> np.ndarray:
    """sup_y T(mu_R(x, y), mu_Y(y)) for every query row x.

    Memberships here are crisp, so the sup reduces to the max relation
    degree over concept members for any t-norm (T(a, 1) = a, T(a, 0) = 0);
    computing it in that form keeps the identity exact, where a literal
    a + 1.0 - 1.0 round trip would lose the last bit.
    """
    members = table.decisions == concept_label
    if not members.any():
        raise EmptyConcept(f"no table row carries decision {concept_label}")
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    relation = _relation_block(kernel, connectives, queries, table.rows, table.active_features)
    return relation[:, members].max(axis=1)


def lower_approximation_batch(
    queries: np.ndarray,
    table: DecisionTable,
    concept_label: int,
    kernel: SimilarityKernel,
    connectives: Connectives,
) -> np.ndarray:
    """inf_y I(mu_R(x, y), mu_Y(y)) for every query row x."""
    if table.rows.shape[0] == 0:
        raise InvalidInput("lower approximation over an empty table")
    membership = _membership(table, concept_label)
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    relation = _relation_block(kernel, connectives, queries, table.rows, table.active_features)
    return connectives.implicator(relation, membership[None, :]).min(axis=1)


def upper_approximation(x, table, concept_label, kernel, connectives) -> float:
    return float(upper_approximation_batch(x, table, concept_label, kernel, connectives)[0])


def lower_approximation(x, table, concept_label, kernel, connectives) -> float:
    return float(lower_approximation_batch(x, table, concept_label, kernel, connectives)[0])


def averaged_frua(
    positives: PairDataset,
    candidates: PairDataset,
    m: int,
    n: int,
    kernel_kind: str = "linear",
    connectives: Connectives | None = None,
    seed: int = 0,
    jobs: int = 1,
) -> FruaScoreTable:
    """Group-averaged upper-approximation degree for every candidate.

    Positives are split into m groups, candidates into n groups; each of the
    m*n group pairs forms a decision table (positives labeled 1, candidates
    labeled 0) whose candidate rows receive an upper-approximation degree
    with respect to the positive concept. A candidate meets every positive
    group once, so its final score is the mean of its m degrees.

    Group-pair tables are independent; with jobs > 1 they are evaluated on a
    thread pool and accumulated in fixed pair order, so results do not
    depend on the worker count.
    """
    if connectives is None:
        connectives = Connectives.lukasiewicz()
    if positives.dim != candidates.dim:
        raise InvalidInput("positives and candidates must share a feature space")
    if not 1 <= m <= len(positives):
        raise InvalidInput(f"m must be in [1, {len(positives)}], got {m}")
    if not 1 <= n <= len(candidates):
        raise InvalidInput(f"n must be in [1, {len(candidates)}], got {n}")

    pos_groups = split_into_groups(len(positives), m, substream_seed(seed, "frua-pos"))
    cand_groups = split_into_groups(len(candidates), n, substream_seed(seed, "frua-cand"))
    pair_indices = list(product(range(m), range(n)))

    def evaluate(pair):
        gi, gj = pair
        pos_idx = pos_groups.members(gi)
        cand_idx = cand_groups.members(gj)
        rows = np.vstack([positives.features[pos_idx], candidates.features[cand_idx]])
        decisions = np.concatenate(
            [np.ones(len(pos_idx), dtype=np.int8), np.zeros(len(cand_idx), dtype=np.int8)]
        )
        table = DecisionTable(rows=rows, decisions=decisions)
        kernel = table.kernel(kernel_kind)
        degrees = upper_approximation_batch(
            candidates.features[cand_idx], table, 1, kernel, connectives
        )
        return cand_idx, degrees

    totals = np.zeros(len(candidates), dtype=np.float64)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(evaluate, pair_indices))
    else:
        results = [evaluate(pair) for pair in pair_indices]
    for cand_idx, degrees in results:  # fixed order keeps sums bitwise stable
        totals[cand_idx] += degrees

    scores = np.clip(totals / m, 0.0, 1.0)
    return FruaScoreTable(keys=candidates.keys(), degrees=scores, m_used=m)
