"""Metrics (ROC-AUC, F1, G-mean, sensitivity, specificity), stratified
cross-validation and holdout splitting, and the threshold-sweep experiment.

AUC uses the rank (Mann-Whitney) formulation with ties counted half, which
agrees with trapezoidal integration for tie-free scores and stays exact
under ties. Rates with a zero denominator are reported as 0 and flagged so
CSV consumers never see non-numeric cells.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coredata import PairDataset, substream_seed
from .errors import InvalidInput, UndefinedMetric
from .fuzzyrough import FruaScoreTable
from .resample import ThresholdPolicy, balance

METRIC_NAMES = ("auc", "f1", "gmean")


@dataclass
class MetricsReport:
    sensitivity: float
    specificity: float
    f1: float
    g_mean: float
    tp: int
    fp: int
    tn: int
    fn: int
    auc: float | None = None
    undefined_rates: tuple[str, ...] = ()

    def value(self, metric: str) -> float:
        if metric == "auc":
            if self.auc is None:
                raise UndefinedMetric("AUC was not computed for this report")
            return self.auc
        if metric == "f1":
            return self.f1
        if metric == "gmean":
            return self.g_mean
        raise InvalidInput(f"unknown metric {metric!r}")


def confusion_and_rates(labels, predictions) -> MetricsReport:
    """Confusion counts and derived rates; AUC left unset."""
    labels = np.asarray(labels).astype(int)
    predictions = np.asarray(predictions).astype(int)
    if labels.shape != predictions.shape:
        raise InvalidInput("labels and predictions must have equal length")
    if labels.size == 0:
        raise InvalidInput("cannot score an empty prediction set")
    if not (np.isin(labels, (0, 1)).all() and np.isin(predictions, (0, 1)).all()):
        raise InvalidInput("labels and predictions must be binary")
    tp = int(np.sum((labels == 1) & (predictions == 1)))
    fn = int(np.sum((labels == 1) & (predictions == 0)))
    tn = int(np.sum((labels == 0) & (predictions == 0)))
    fp = int(np.sum((labels == 0) & (predictions == 1)))
    undefined = []

    def rate(num, den, name):
        if den == 0:
            undefined.append(name)
            return 0.0
        return num / den

    sensitivity = rate(tp, tp + fn, "sensitivity")
    specificity = rate(tn, tn + fp, "specificity")
    f1 = rate(2 * tp, 2 * tp + fp + fn, "f1")
    return MetricsReport(
        sensitivity=sensitivity,
        specificity=specificity,
        f1=f1,
        g_mean=float(np.sqrt(sensitivity * specificity)),
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        undefined_rates=tuple(undefined),
    )


def roc_auc(labels, scores) -> float:
    """Probability that a random positive outscores a random negative, ties
    counted one half (rank statistic)."""
    labels = np.asarray(labels).astype(int)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise InvalidInput("labels and scores must have equal length")
    if not np.isfinite(scores).all():
        raise InvalidInput("scores must be finite")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetric("AUC needs both classes present")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores), dtype=np.float64)
    ranks[order] = np.arange(1, len(scores) + 1)
    # replace ranks within tied score runs by their mean
    sorted_scores = scores[order]
    boundaries = np.flatnonzero(np.diff(sorted_scores) != 0) + 1
    starts = np.concatenate([[0], boundaries])
    stops = np.concatenate([boundaries, [len(scores)]])
    for a, b in zip(starts, stops):
        if b - a > 1:
            ranks[order[a:b]] = (a + 1 + b) / 2.0
    rank_sum = float(ranks[labels == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def evaluate_scores(labels, scores, threshold: float = 0.5) -> MetricsReport:
    report = confusion_and_rates(labels, np.asarray(scores) >= threshold)
    report.auc = roc_auc(labels, scores)
    return report


def mean_report(reports: list[MetricsReport]) -> MetricsReport:
    """Field-wise mean of per-fold reports; confusion counts are summed."""
    if not reports:
        raise InvalidInput("no reports to average")
    aucs = [r.auc for r in reports if r.auc is not None]
    return MetricsReport(
        sensitivity=float(np.mean([r.sensitivity for r in reports])),
        specificity=float(np.mean([r.specificity for r in reports])),
        f1=float(np.mean([r.f1 for r in reports])),
        g_mean=float(np.mean([r.g_mean for r in reports])),
        tp=sum(r.tp for r in reports),
        fp=sum(r.fp for r in reports),
        tn=sum(r.tn for r in reports),
        fn=sum(r.fn for r in reports),
        auc=float(np.mean(aucs)) if aucs else None,
    )


def score_metric(metric: str, labels, scores) -> float:
    if metric == "auc":
        return roc_auc(labels, scores)
    report = confusion_and_rates(labels, np.asarray(scores) >= 0.5)
    return report.value(metric)


def stratified_fold_indices(labels, k: int, seed: int) -> list[np.ndarray]:
    """Test-index arrays for k seeded stratified folds."""
    labels = np.asarray(labels).astype(int)
    if k < 2:
        raise InvalidInput("need at least two folds")
    fold_of = np.empty(len(labels), dtype=int)
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if len(members) < k:
            raise InvalidInput(
                f"class {c} has {len(members)} samples, too few for {k} folds"
            )
        order = np.random.default_rng(substream_seed(seed, f"fold-class-{c}")).permutation(
            len(members)
        )
        fold_of[members[order]] = np.arange(len(members)) % k
    return [np.flatnonzero(fold_of == f) for f in range(k)]


def k_fold_cv(
    dataset: PairDataset, k: int, pipeline_fn, seed: int
) -> tuple[list[MetricsReport], MetricsReport]:
    """Stratified k-fold evaluation of pipeline_fn(train, test) -> scores."""
    folds = stratified_fold_indices(dataset.labels, k, seed)
    reports = []
    for test_idx in folds:
        mask = np.ones(len(dataset), dtype=bool)
        mask[test_idx] = False
        train = dataset.subset(np.flatnonzero(mask))
        test = dataset.subset(test_idx)
        scores = np.asarray(pipeline_fn(train, test), dtype=np.float64)
        reports.append(evaluate_scores(test.labels, scores))
    return reports, mean_report(reports)


def holdout_split(
    dataset: PairDataset, ratio: float, seed: int
) -> tuple[PairDataset, PairDataset]:
    """Stratified seeded split; ratio is the training fraction."""
    if not 0.0 < ratio < 1.0:
        raise InvalidInput("holdout ratio must lie in (0, 1)")
    labels = np.asarray(dataset.labels)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        rng = np.random.default_rng(substream_seed(seed, f"holdout-class-{c}"))
        members = members[rng.permutation(len(members))]
        n_train = int(round(ratio * len(members)))
        train_idx.append(members[:n_train])
        test_idx.append(members[n_train:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    if len(train) == 0 or len(test) == 0:
        raise InvalidInput("holdout split left one side empty")
    return dataset.subset(train), dataset.subset(test)


@dataclass
class SweepRow:
    threshold: float
    auc: float = 0.0
    f1: float = 0.0
    gmean: float = 0.0
    runtime_s: float = 0.0
    error: str = ""


@dataclass
class SweepOptions:
    """Everything the per-threshold pipeline needs besides the threshold."""

    t_p: float = 0.8
    t_q: float = 0.2
    sweep_param: str = "tq"  # tq | tp
    beta: float = 1.0
    adasyn_k: int = 5
    holdout_ratio: float = 0.7
    # (train PairDataset) -> model with predict_proba
    train_fn: Callable = None
    # (train PairDataset) -> feature index array, or None to keep all
    feature_selector: Callable | None = None


def threshold_sweep(
    positives: PairDataset,
    candidates: PairDataset,
    scores: FruaScoreTable,
    thresholds,
    options: SweepOptions,
    seed: int,
) -> list[SweepRow]:
    """balance -> holdout -> train -> metrics, once per threshold.

    Per-threshold failures become rows carrying the error message instead
    of aborting the sweep.
    """
    rows = []
    for t in thresholds:
        started = time.perf_counter()
        row = SweepRow(threshold=float(t))
        try:
            if options.sweep_param == "tq":
                policy = ThresholdPolicy(t_p=options.t_p, t_q=float(t))
            else:
                policy = ThresholdPolicy(t_p=float(t), t_q=options.t_q)
            balanced = balance(
                positives,
                candidates,
                scores,
                policy,
                beta=options.beta,
                K=options.adasyn_k,
                seed=substream_seed(seed, f"sweep-balance-{t!r}"),
            )
            train, test = holdout_split(
                balanced.dataset, options.holdout_ratio, substream_seed(seed, "sweep-holdout")
            )
            if options.feature_selector is not None:
                keep = options.feature_selector(train)
                train = _project(train, keep)
                test = _project(test, keep)
            model = options.train_fn(train)
            report = evaluate_scores(test.labels, model.predict_proba(test.features))
            row.auc = report.auc
            row.f1 = report.f1
            row.gmean = report.g_mean
        except Exception as exc:  # recorded, not fatal
            row.error = f"{type(exc).__name__}: {exc}"
        row.runtime_s = time.perf_counter() - started
        rows.append(row)
    return rows


def _project(dataset: PairDataset, feature_indices) -> PairDataset:
    return PairDataset(
        dataset.drug_ids,
        dataset.target_ids,
        dataset.features[:, np.asarray(feature_indices, dtype=int)],
        dataset.labels,
        dataset.frua_scores,
        dataset.synthetic,
    )
