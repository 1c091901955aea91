"""Mini-batch incremental PCA and forest-importance feature selection.

The incremental update rebuilds an SVD of [singular-value-scaled components;
centered batch; mean-correction row] after each mini-batch, which reproduces
batch PCA exactly when a single batch covers all rows. Fitting is sequential
and order-dependent by definition; transforming is stateless.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .coredata import FeatureMatrix, PairDataset, split_into_groups, substream_seed
from .errors import FormatError, InvalidInput
from .learners import ForestParams, fit_forest


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # q x d, orthonormal rows
    explained_variance: np.ndarray  # q, nonincreasing
    n_seen: int
    total_variance: float

    def __post_init__(self):
        q, d = self.components.shape
        if q > d:
            raise InvalidInput("more components than features")
        gram = self.components @ self.components.T
        if not np.allclose(gram, np.eye(q), atol=1e-8):
            raise InvalidInput("components are not orthonormal")
        if np.any(np.diff(self.explained_variance) > 1e-10):
            raise InvalidInput("explained variance must be nonincreasing")

    @property
    def q(self) -> int:
        return self.components.shape[0]

    @property
    def dim(self) -> int:
        return self.components.shape[1]

    @property
    def explained_variance_ratio(self) -> np.ndarray:
        if self.total_variance <= 0:
            return np.zeros_like(self.explained_variance)
        return self.explained_variance / self.total_variance


def _canonical_signs(components: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude entry is positive."""
    flips = np.sign(components[np.arange(len(components)), np.argmax(np.abs(components), axis=1)])
    flips[flips == 0] = 1.0
    return components * flips[:, None]


class IncrementalPca:
    """Sequential mini-batch PCA fitter. Feed row batches in a fixed order;
    the result is deterministic for that order."""

    def __init__(self, q: int, dim: int):
        if q < 1 or q > dim:
            raise InvalidInput(f"q must be in [1, {dim}], got {q}")
        self.q = q
        self.dim = dim
        self.mean = np.zeros(dim)
        self.components: np.ndarray | None = None
        self.singular_values: np.ndarray | None = None
        self.n_seen = 0
        self._sum = np.zeros(dim)
        self._sumsq = np.zeros(dim)

    def partial_fit(self, batch: np.ndarray) -> None:
        batch = np.atleast_2d(np.asarray(batch, dtype=np.float64))
        m = batch.shape[0]
        if batch.shape[1] != self.dim:
            raise InvalidInput("batch dimension does not match the model")
        if self.n_seen == 0 and m < self.q:
            raise InvalidInput(f"first batch needs at least q={self.q} rows")
        self._sum += batch.sum(axis=0)
        self._sumsq += (batch**2).sum(axis=0)

        batch_mean = batch.mean(axis=0)
        if self.n_seen == 0:
            stack = batch - batch_mean
            new_mean = batch_mean
        else:
            correction = np.sqrt(self.n_seen * m / (self.n_seen + m)) * (
                self.mean - batch_mean
            )
            stack = np.vstack(
                [
                    self.singular_values[:, None] * self.components,
                    batch - batch_mean,
                    correction[None, :],
                ]
            )
            new_mean = (self.n_seen * self.mean + m * batch_mean) / (self.n_seen + m)
        _, s, vt = np.linalg.svd(stack, full_matrices=False)
        self.components = _canonical_signs(vt[: self.q])
        self.singular_values = s[: self.q]
        self.mean = new_mean
        self.n_seen += m

    def to_model(self) -> PcaModel:
        if self.n_seen <= 1:
            raise InvalidInput("need at least two rows to estimate variance")
        explained = self.singular_values**2 / (self.n_seen - 1)
        total = float(
            np.sum((self._sumsq - self.n_seen * (self._sum / self.n_seen) ** 2))
            / (self.n_seen - 1)
        )
        return PcaModel(
            mean=self.mean.copy(),
            components=self.components.copy(),
            explained_variance=explained,
            n_seen=self.n_seen,
            total_variance=max(total, 0.0),
        )


def ipca_fit(matrix: FeatureMatrix | np.ndarray, q: int, batch_size: int) -> PcaModel:
    """Fit over row slices of the matrix in storage order."""
    values = matrix.values if isinstance(matrix, FeatureMatrix) else np.asarray(matrix, float)
    n, d = values.shape
    if q > d:
        raise InvalidInput(f"q={q} exceeds feature dimension {d}")
    if batch_size < q:
        raise InvalidInput("batch_size must be at least q")
    if n < q:
        raise InvalidInput("need at least q rows to fit")
    fitter = IncrementalPca(q, d)
    for start in range(0, n, batch_size):
        fitter.partial_fit(values[start : start + batch_size])
    return fitter.to_model()


def transform_rows(model: PcaModel, rows: np.ndarray) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    if rows.shape[1] != model.dim:
        raise InvalidInput(f"rows have dim {rows.shape[1]}, model expects {model.dim}")
    return (rows - model.mean) @ model.components.T


def ipca_transform(model: PcaModel, matrix: FeatureMatrix) -> FeatureMatrix:
    if matrix.dim != model.dim:
        raise InvalidInput(f"matrix dim {matrix.dim} does not match model {model.dim}")
    reduced = transform_rows(model, matrix.values)
    names = [f"pc{i + 1}" for i in range(model.q)]
    return FeatureMatrix.build(matrix.ids, reduced, names)


def truncate_model(model: PcaModel, variance_target: float, cap: int) -> PcaModel:
    """Smallest q whose cumulative explained-variance ratio reaches the
    target, capped. Falls back to the cap when the target is unreachable."""
    ratios = np.cumsum(model.explained_variance_ratio)
    reaching = np.flatnonzero(ratios >= variance_target)
    q = int(reaching[0]) + 1 if reaching.size else model.q
    q = min(q, cap, model.q)
    return PcaModel(
        mean=model.mean,
        components=model.components[:q],
        explained_variance=model.explained_variance[:q],
        n_seen=model.n_seen,
        total_variance=model.total_variance,
    )


def save_pca_model(path, model: PcaModel) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["block", "values"])
        writer.writerow(["meta", model.dim, model.q, model.n_seen, repr(float(model.total_variance))])
        writer.writerow(["mean", *(repr(float(v)) for v in model.mean)])
        for row in model.components:
            writer.writerow(["component", *(repr(float(v)) for v in row)])
        writer.writerow(["variance", *(repr(float(v)) for v in model.explained_variance)])


def load_pca_model(path) -> PcaModel:
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0][0] != "block" or rows[1][0] != "meta":
        raise FormatError(f"{path}: not a PCA model file")
    _, d, q, n_seen, total = rows[1][:5]
    mean = None
    components = []
    variance = None
    for row in rows[2:]:
        kind, values = row[0], np.array([float(v) for v in row[1:]])
        if kind == "mean":
            mean = values
        elif kind == "component":
            components.append(values)
        elif kind == "variance":
            variance = values
        else:
            raise FormatError(f"{path}: unknown block {kind!r}")
    if mean is None or variance is None or len(components) != int(q):
        raise FormatError(f"{path}: incomplete model blocks")
    return PcaModel(
        mean=mean,
        components=np.vstack(components),
        explained_variance=variance,
        n_seen=int(n_seen),
        total_variance=float(total),
    )


def rf_feature_importance(
    dataset: PairDataset | tuple,
    group_pairs: tuple[int, int],
    rf_params: ForestParams,
    seed: int = 0,
) -> np.ndarray:
    """Mean-decrease-in-impurity importances averaged over group pairs.

    Positives and negatives are split into group_pairs = (m, n) groups; one
    forest is fitted per positive/negative group pair and the normalized
    importances are averaged. The result is nonnegative and sums to 1.
    """
    if isinstance(dataset, PairDataset):
        X, y = dataset.features, np.asarray(dataset.labels)
    else:
        X, y = dataset
        X = np.asarray(X, float)
        y = np.asarray(y)
    pos_idx = np.flatnonzero(y == 1)
    neg_idx = np.flatnonzero(y == 0)
    if len(pos_idx) == 0 or len(neg_idx) == 0:
        raise InvalidInput("feature importance needs both classes")
    m, n = group_pairs
    m = min(max(1, m), len(pos_idx))
    n = min(max(1, n), len(neg_idx))
    pos_groups = split_into_groups(len(pos_idx), m, substream_seed(seed, "imp-pos"))
    neg_groups = split_into_groups(len(neg_idx), n, substream_seed(seed, "imp-neg"))
    acc = np.zeros(X.shape[1], dtype=np.float64)
    for gi in range(m):
        for gj in range(n):
            subset = np.concatenate(
                [pos_idx[pos_groups.members(gi)], neg_idx[neg_groups.members(gj)]]
            )
            subset.sort()
            params = ForestParams(
                n_estimators=rf_params.n_estimators,
                tree=rf_params.tree,
                bootstrap=rf_params.bootstrap,
                seed=substream_seed(seed, f"imp-forest-{gi}-{gj}"),
            )
            forest = fit_forest((X[subset], y[subset]), params)
            acc += forest.feature_importances_
    total = acc.sum()
    if total <= 0:
        return np.full(X.shape[1], 1.0 / X.shape[1])
    return acc / total


def select_top_k_features(importances: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest importances, ties to the lower index,
    returned in ascending index order."""
    importances = np.asarray(importances, dtype=np.float64)
    d = importances.shape[0]
    if not 1 <= k <= d:
        raise InvalidInput(f"k must be in [1, {d}], got {k}")
    ranked = np.argsort(-importances, kind="stable")
    return np.sort(ranked[:k])
