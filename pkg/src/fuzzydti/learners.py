"""Native binary classifiers: CART decision tree, random forest, and
RUSBoost, plus exhaustive grid search and a replayable text model format.

Trees grow by greedy best-gini-decrease axis-aligned splits. Candidate
thresholds are midpoints between consecutive sorted unique feature values;
equal gains break to the lowest feature index, then the lowest threshold,
so fitting is deterministic given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .coredata import PairDataset, substream_seed
from .errors import FormatError, InvalidInput

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TreeParams:
    criterion: str = "gini"
    max_depth: int = 9
    min_samples_leaf: int = 1
    min_samples_split: int = 6
    max_features_rule: str = "sqrt"  # sqrt | all

    def __post_init__(self):
        if self.criterion != "gini":
            raise InvalidInput("only the gini criterion is supported")
        if self.max_depth < 1 or self.min_samples_leaf < 1 or self.min_samples_split < 2:
            raise InvalidInput("tree params out of range")
        if self.max_features_rule not in ("sqrt", "all"):
            raise InvalidInput("max_features_rule must be 'sqrt' or 'all'")


@dataclass(frozen=True)
class ForestParams:
    n_estimators: int = 200
    tree: TreeParams = field(
        default_factory=lambda: TreeParams(
            max_depth=20, min_samples_leaf=3, min_samples_split=8
        )
    )
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise InvalidInput("a forest needs at least one tree")


@dataclass(frozen=True)
class BoostParams:
    n_estimators: int = 500
    learning_rate: float = 1.0
    base_tree: TreeParams = field(
        default_factory=lambda: TreeParams(
            max_depth=3, min_samples_leaf=1, min_samples_split=2, max_features_rule="all"
        )
    )
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise InvalidInput("boosting needs at least one round")
        if self.learning_rate <= 0:
            raise InvalidInput("learning_rate must be positive")


def gini_impurity(class_counts) -> float:
    """1 - sum of squared class proportions."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.size == 0 or (counts < 0).any() or counts.sum() == 0:
        raise InvalidInput("class counts must be non-negative and not all zero")
    p = counts / counts.sum()
    return float(1.0 - np.sum(p**2))


def _xy(dataset) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(dataset, PairDataset):
        X, y = dataset.features, dataset.labels
    else:
        X, y = dataset
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise InvalidInput("features and labels disagree on sample count")
    if X.shape[0] == 0:
        raise InvalidInput("cannot fit on an empty dataset")
    if not np.isin(y, (0, 1)).all():
        raise InvalidInput("labels must be binary 0/1")
    return X, y.astype(np.int8)


class TreeModel:
    """Flat node arrays: feature/threshold/left/right per node, with the
    positive-class fraction stored on every node."""

    def __init__(self, feature, threshold, left, right, proba, importances=None):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.proba = np.asarray(proba, dtype=np.float64)
        self.importances = importances

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            active = self.left[node] >= 0
            if not active.any():
                break
            idx = np.flatnonzero(active)
            cur = node[idx]
            go_left = X[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
        return self.proba[node]

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            for child in (self.left[i], self.right[i]):
                if child >= 0:
                    depths[child] = depths[i] + 1
        return int(depths.max()) if self.n_nodes else 0


def _best_split(Xn: np.ndarray, y_node: np.ndarray, min_leaf: int):
    """Best (feature, threshold, weighted child cost) over the given
    columns, or None when no admissible split exists."""
    m, f = Xn.shape
    if m < 2:
        return None
    order = np.argsort(Xn, axis=0, kind="stable")
    svals = np.take_along_axis(Xn, order, axis=0)
    spos = np.cumsum(y_node[order], axis=0, dtype=np.float64)
    total_pos = float(y_node.sum())

    nl = np.arange(1, m, dtype=np.float64)[:, None]
    nr = m - nl
    pl = spos[:-1]
    pr = total_pos - pl
    cost = (nl - (pl**2 + (nl - pl) ** 2) / nl) + (nr - (pr**2 + (nr - pr) ** 2) / nr)
    valid = (svals[1:] > svals[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
    cost[~valid] = np.inf

    pos_per_feature = np.argmin(cost, axis=0)
    cost_per_feature = cost[pos_per_feature, np.arange(f)]
    best_f = int(np.argmin(cost_per_feature))
    best_cost = float(cost_per_feature[best_f])
    if not np.isfinite(best_cost):
        return None
    pos = int(pos_per_feature[best_f])
    threshold = float((svals[pos, best_f] + svals[pos + 1, best_f]) / 2.0)
    return best_f, threshold, best_cost


def fit_tree(dataset, params: TreeParams, seed: int = 0) -> TreeModel:
    """Grow a CART tree. Nodes expand until pure, until they hold fewer than
    min_samples_split samples, or until max_depth; children below
    min_samples_leaf are never created."""
    X, y = _xy(dataset)
    n, d = X.shape
    rng = np.random.default_rng(seed)
    if params.max_features_rule == "sqrt":
        mtry = max(1, int(math.sqrt(d)))
    else:
        mtry = d

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    proba: list[float] = []
    importances = np.zeros(d, dtype=np.float64)

    def new_node() -> int:
        feature.append(-1)
        threshold.append(math.nan)
        left.append(-1)
        right.append(-1)
        proba.append(0.0)
        return len(feature) - 1

    def build(indices: np.ndarray, depth: int) -> int:
        node = new_node()
        y_node = y[indices]
        m = len(indices)
        n_pos = int(y_node.sum())
        proba[node] = n_pos / m
        if n_pos in (0, m) or m < params.min_samples_split or depth >= params.max_depth:
            return node
        if mtry < d:
            feats = np.sort(rng.choice(d, size=mtry, replace=False))
        else:
            feats = np.arange(d)
        found = _best_split(X[np.ix_(indices, feats)], y_node, params.min_samples_leaf)
        if found is None:
            return node
        f_local, thr, child_cost = found
        parent_cost = m - (n_pos**2 + (m - n_pos) ** 2) / m
        gain = parent_cost - child_cost
        if gain <= 1e-12:
            return node
        f_global = int(feats[f_local])
        go_left = X[indices, f_global] <= thr
        feature[node] = f_global
        threshold[node] = thr
        importances[f_global] += gain
        left[node] = build(indices[go_left], depth + 1)
        right[node] = build(indices[~go_left], depth + 1)
        return node

    build(np.arange(n), 0)
    # raw count-weighted gini decreases; forests normalize their totals
    return TreeModel(feature, threshold, left, right, proba, importances=importances)


class ForestModel:
    def __init__(self, trees: list[TreeModel], raw_importances: np.ndarray | None):
        self.trees = trees
        if raw_importances is None:
            self.feature_importances_ = None
        else:
            total = raw_importances.sum()
            self.feature_importances_ = (
                raw_importances / total if total > 0 else raw_importances
            )

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            acc += tree.predict_proba(X)
        return acc / len(self.trees)


def fit_forest(dataset, params: ForestParams) -> ForestModel:
    """Bagged CART trees with per-node feature sampling; probabilities are
    the mean of tree leaf fractions and importances are the normalized total
    gini decrease accumulated over all trees."""
    X, y = _xy(dataset)
    n, d = X.shape
    trees = []
    raw = np.zeros(d, dtype=np.float64)
    for i in range(params.n_estimators):
        tree_seed = substream_seed(params.seed, f"tree-{i}")
        if params.bootstrap:
            boot = np.random.default_rng(tree_seed).integers(0, n, size=n)
        else:
            boot = np.arange(n)
        tree = fit_tree(
            (X[boot], y[boot]), params.tree, seed=substream_seed(tree_seed, "features")
        )
        trees.append(tree)
        raw += tree.importances
    return ForestModel(trees, raw)


class BoostModel:
    def __init__(self, trees: list[TreeModel], alphas: list[float]):
        self.trees = trees
        self.alphas = alphas

    def margin(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        total = np.zeros(X.shape[0], dtype=np.float64)
        for tree, alpha in zip(self.trees, self.alphas):
            votes = np.where(tree.predict_proba(X) >= 0.5, 1.0, -1.0)
            total += alpha * votes
        return total

    def predict_proba(self, X) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-self.margin(X)))


def boost_rounds(X: np.ndarray, y: np.ndarray, params: BoostParams):
    """Yield (tree, alpha, weighted_error, weights_after_round) per boosting
    round. Stops after the round whose error is 0 and before keeping any
    round with error >= 0.5."""
    n = X.shape[0]
    w = np.full(n, 1.0 / n, dtype=np.float64)
    for t in range(params.n_estimators):
        n_pos = int(y.sum())
        minority_label = 1 if n_pos <= n - n_pos else 0
        min_idx = np.flatnonzero(y == minority_label)
        maj_idx = np.flatnonzero(y != minority_label)
        rng = np.random.default_rng(substream_seed(params.seed, f"rus-{t}"))
        p = w[maj_idx] / w[maj_idx].sum()
        sampled = rng.choice(maj_idx, size=len(min_idx), replace=False, p=p)
        train_idx = np.sort(np.concatenate([min_idx, sampled]))
        tree = fit_tree(
            (X[train_idx], y[train_idx]),
            params.base_tree,
            seed=substream_seed(params.seed, f"tree-{t}"),
        )
        predicted = (tree.predict_proba(X) >= 0.5).astype(np.int8)
        err = float(w[predicted != y].sum())
        if err >= 0.5:
            return
        err_safe = max(err, 1e-10)
        alpha = params.learning_rate * 0.5 * math.log((1.0 - err_safe) / err_safe)
        if err > 0.0:
            agreement = np.where(predicted == y, 1.0, -1.0)
            w = w * np.exp(-alpha * agreement)
            w = w / w.sum()
        yield tree, alpha, err, w
        if err == 0.0:
            return


def fit_rusboost(dataset, params: BoostParams) -> BoostModel:
    """AdaBoost with per-round random undersampling of the majority class.

    Each round draws majority samples (without replacement, probability
    proportional to current weights) down to the minority count, fits the
    base tree on that balanced subset, then computes the weighted error on
    the full set. Rounds stop early on error 0 or error >= 0.5.
    """
    X, y = _xy(dataset)
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == len(y):
        raise InvalidInput("boosting needs both classes present")
    trees: list[TreeModel] = []
    alphas: list[float] = []
    for tree, alpha, _err, _w in boost_rounds(X, y, params):
        trees.append(tree)
        alphas.append(alpha)
    return BoostModel(trees, alphas)


# ---------------------------------------------------------------------------
# grid search


@dataclass
class GridCell:
    params: dict
    fold_scores: list[float]
    mean_score: float
    error: str | None = None


@dataclass
class GridSearchResult:
    best_index: int
    cells: list[GridCell]

    @property
    def best_params(self) -> dict:
        return self.cells[self.best_index].params


def expand_grid(grid: dict[str, list]) -> list[dict]:
    """Cartesian product of candidate values, in declared key order."""
    if not grid:
        return []
    names = list(grid.keys())
    return [dict(zip(names, combo)) for combo in product(*(grid[n] for n in names))]


def grid_search(
    dataset,
    fit_fn,
    grid: dict[str, list],
    cv_folds: int = 5,
    metric: str = "auc",
    seed: int = 0,
) -> GridSearchResult:
    """Exhaustive CV evaluation of every grid cell.

    fit_fn(cell_params, train_xy) must return a fitted model with
    predict_proba. Invalid cells are recorded with their error instead of
    aborting the search; ties on the mean score go to the earliest cell.
    """
    from .evaluate import score_metric, stratified_fold_indices

    X, y = _xy(dataset)
    cells_params = expand_grid(grid)
    if not cells_params:
        raise InvalidInput("grid search needs at least one cell")
    folds = stratified_fold_indices(y, cv_folds, substream_seed(seed, "grid-folds"))
    cells: list[GridCell] = []
    for cell in cells_params:
        try:
            fold_scores = []
            for test_idx in folds:
                mask = np.ones(len(y), dtype=bool)
                mask[test_idx] = False
                model = fit_fn(cell, (X[mask], y[mask]))
                scores = model.predict_proba(X[test_idx])
                fold_scores.append(score_metric(metric, y[test_idx], scores))
            cells.append(GridCell(cell, fold_scores, float(np.mean(fold_scores))))
        except (InvalidInput, ValueError) as exc:
            cells.append(GridCell(cell, [], float("-inf"), error=str(exc)))
    best = max(range(len(cells)), key=lambda i: cells[i].mean_score)
    return GridSearchResult(best_index=best, cells=cells)


# ---------------------------------------------------------------------------
# serialization


def _write_tree(handle, tree: TreeModel) -> None:
    handle.write(f"nodes {tree.n_nodes}\n")
    for i in range(tree.n_nodes):
        if tree.left[i] < 0:
            handle.write(f"{i} leaf {float(tree.proba[i])!r}\n")
        else:
            handle.write(
                f"{i} split {tree.feature[i]} {float(tree.threshold[i])!r} "
                f"{tree.left[i]} {tree.right[i]} {float(tree.proba[i])!r}\n"
            )


def save_model(path, model) -> None:
    """Versioned text dump (node lists) so evaluations are replayable."""
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        handle.write(f"fuzzydti-model {MODEL_FORMAT_VERSION}\n")
        if isinstance(model, TreeModel):
            handle.write("kind tree\ntrees 1\n")
            handle.write("tree 0\n")
            _write_tree(handle, model)
        elif isinstance(model, ForestModel):
            handle.write(f"kind forest\ntrees {len(model.trees)}\n")
            for i, tree in enumerate(model.trees):
                handle.write(f"tree {i}\n")
                _write_tree(handle, tree)
        elif isinstance(model, BoostModel):
            handle.write(f"kind rusboost\ntrees {len(model.trees)}\n")
            for i, (tree, alpha) in enumerate(zip(model.trees, model.alphas)):
                handle.write(f"tree {i} alpha {float(alpha)!r}\n")
                _write_tree(handle, tree)
        else:
            raise InvalidInput(f"cannot serialize {type(model).__name__}")


def _read_tree(lines, pos: int) -> tuple[TreeModel, int]:
    head = lines[pos].split()
    if head[0] != "nodes":
        raise FormatError(f"expected node count, got {lines[pos]!r}")
    count = int(head[1])
    pos += 1
    feature = [-1] * count
    threshold = [math.nan] * count
    left = [-1] * count
    right = [-1] * count
    proba = [0.0] * count
    for _ in range(count):
        parts = lines[pos].split()
        i = int(parts[0])
        if parts[1] == "leaf":
            proba[i] = float(parts[2])
        elif parts[1] == "split":
            feature[i] = int(parts[2])
            threshold[i] = float(parts[3])
            left[i] = int(parts[4])
            right[i] = int(parts[5])
            proba[i] = float(parts[6])
        else:
            raise FormatError(f"unknown node kind in {lines[pos]!r}")
        pos += 1
    return TreeModel(feature, threshold, left, right, proba), pos


def load_model(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("fuzzydti-model"):
        raise FormatError(f"{path}: not a model file")
    version = int(lines[0].split()[1])
    if version != MODEL_FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported model format {version}")
    kind = lines[1].split()[1]
    n_trees = int(lines[2].split()[1])
    pos = 3
    trees: list[TreeModel] = []
    alphas: list[float] = []
    for _ in range(n_trees):
        header = lines[pos].split()
        if header[0] != "tree":
            raise FormatError(f"{path}: expected tree header at line {pos + 1}")
        if kind == "rusboost":
            alphas.append(float(header[3]))
        pos += 1
        tree, pos = _read_tree(lines, pos)
        trees.append(tree)
    if kind == "tree":
        return trees[0]
    if kind == "forest":
        return ForestModel(trees, None)
    if kind == "rusboost":
        return BoostModel(trees, alphas)
    raise FormatError(f"{path}: unknown model kind {kind!r}")
