"""Figure rendering for the report-producing stages.

Each plot is written next to its CSV with a pinned size, dpi and PNG
metadata so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

PNG_METADATA = {"Software": "fuzzydti"}
_FIGSIZE = (7.0, 4.5)
_DPI = 120


def _save(fig, path) -> None:
    fig.savefig(path, dpi=_DPI, metadata=PNG_METADATA)
    plt.close(fig)


def save_sweep_plot(rows, path) -> None:
    """Threshold versus AUC / F1 / G-mean lines; error rows are skipped."""
    ok = [r for r in rows if not r.error]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    if ok:
        thresholds = [r.threshold for r in ok]
        ax.plot(thresholds, [r.auc for r in ok], marker="o", label="AUC")
        ax.plot(thresholds, [r.f1 for r in ok], marker="s", label="F1")
        ax.plot(thresholds, [r.gmean for r in ok], marker="^", label="G-mean")
        ax.legend()
    ax.set_xlabel("threshold")
    ax.set_ylabel("score")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Score threshold sweep")
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def save_cv_plot(reports, mean, path) -> None:
    """Grouped per-fold bars for AUC, F1 and G-mean."""
    k = len(reports)
    x = np.arange(k)
    width = 0.27
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.bar(x - width, [r.auc for r in reports], width, label="AUC")
    ax.bar(x, [r.f1 for r in reports], width, label="F1")
    ax.bar(x + width, [r.g_mean for r in reports], width, label="G-mean")
    ax.axhline(mean.auc, linestyle="--", linewidth=1, color="gray")
    ax.set_xticks(x)
    ax.set_xticklabels([f"fold {i}" for i in range(k)])
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.set_title(f"{k}-fold cross-validation (mean AUC {mean.auc:.3f})")
    ax.legend()
    _save(fig, path)


def save_roc_plot(labels, scores, auc, path) -> None:
    labels = np.asarray(labels).astype(int)
    scores = np.asarray(scores, dtype=float)
    order = np.argsort(-scores, kind="mergesort")
    tp = np.concatenate([[0], np.cumsum(labels[order] == 1)])
    fp = np.concatenate([[0], np.cumsum(labels[order] == 0)])
    tpr = tp / max(tp[-1], 1)
    fpr = fp / max(fp[-1], 1)
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.plot(fpr, tpr, label=f"AUC = {auc:.3f}")
    ax.plot([0, 1], [0, 1], linestyle=":", color="gray")
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title("Holdout ROC")
    ax.legend(loc="lower right")
    _save(fig, path)


def save_grid_plot(cells, metric, path) -> None:
    """Heatmap over two varying grid parameters, or a bar chart otherwise."""
    scored = [c for c in cells if c.error is None]
    varying = []
    if scored:
        for name in scored[0].params:
            values = {repr(c.params[name]) for c in scored}
            if len(values) > 1:
                varying.append(name)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    if len(varying) == 2 and scored:
        xs = sorted({c.params[varying[0]] for c in scored}, key=repr)
        ys = sorted({c.params[varying[1]] for c in scored}, key=repr)
        grid = np.full((len(ys), len(xs)), np.nan)
        for c in scored:
            grid[ys.index(c.params[varying[1]]), xs.index(c.params[varying[0]])] = c.mean_score
        im = ax.imshow(grid, aspect="auto", origin="lower", cmap="viridis")
        ax.set_xticks(range(len(xs)))
        ax.set_xticklabels([str(v) for v in xs])
        ax.set_yticks(range(len(ys)))
        ax.set_yticklabels([str(v) for v in ys])
        ax.set_xlabel(varying[0])
        ax.set_ylabel(varying[1])
        fig.colorbar(im, ax=ax, label=f"mean {metric}")
    else:
        labels = [", ".join(f"{k}={v}" for k, v in c.params.items()) for c in scored]
        ax.barh(range(len(scored)), [c.mean_score for c in scored])
        ax.set_yticks(range(len(scored)))
        ax.set_yticklabels(labels, fontsize=7)
        ax.set_xlabel(f"mean {metric}")
    ax.set_title("Grid search scores")
    fig.tight_layout()
    _save(fig, path)
