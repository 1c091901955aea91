"""Naive reference implementations used as oracles.

Everything here is written as plainly as possible (double loops, explicit
set algebra, exhaustive enumeration) and stays independent of the library
code paths it checks.
"""

import itertools
import math

import numpy as np


def naive_pairwise_distances(X):
    n = len(X)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = math.sqrt(sum((X[i][k] - X[j][k]) ** 2 for k in range(len(X[i]))))
    return out


def naive_knn_sets(X, k):
    D = naive_pairwise_distances(X)
    sets = []
    for i in range(len(X)):
        order = sorted((D[i, j], j) for j in range(len(X)) if j != i)
        sets.append([j for _, j in order[:k]])
    return sets


def naive_snn_overlap(X, k, a, b):
    sets = naive_knn_sets(X, k)
    return len(set(sets[a]) & set(sets[b]))


def naive_shared_nn(X, k, i):
    sets = naive_knn_sets(X, k)
    union = set()
    for r in range(len(X)):
        if r == i:
            continue
        union |= set(sets[i]) & set(sets[r])
    return sorted(union)


def exhaustive_kmedoids_cost(D, k):
    """Minimum total point-to-medoid distance over all C(n, k) medoid sets."""
    n = D.shape[0]
    best = math.inf
    for medoids in itertools.combinations(range(n), k):
        cost = sum(min(D[i, m] for m in medoids) for i in range(n))
        best = min(best, cost)
    return best


def naive_feature_similarity(kind, x, y, lo, hi, var):
    if kind == "linear":
        span = hi - lo
        if span == 0:
            return 1.0 if x == y else 0.0
        return min(1.0, max(0.0, 1.0 - abs(x - y) / span))
    if kind == "gaussian":
        if var == 0:
            return 1.0 if x == y else 0.0
        return math.exp(-((x - y) ** 2) / (2.0 * var))
    sigma = math.sqrt(var)
    if sigma == 0:
        return 1.0 if x == y else 0.0
    return max(0.0, 1.0 - abs(x - y) / sigma)


def naive_relation(kind, t_norm, x, y, mins, maxs, variances):
    degree = None
    for f in range(len(x)):
        sim = naive_feature_similarity(kind, x[f], y[f], mins[f], maxs[f], variances[f])
        if degree is None:
            degree = sim
        elif t_norm == "lukasiewicz":
            degree = max(0.0, degree + sim - 1.0)
        else:
            degree = min(degree, sim)
    return degree


def naive_upper(kind, t_norm, x, rows, decisions, concept):
    mins = rows.min(axis=0)
    maxs = rows.max(axis=0)
    variances = rows.var(axis=0)
    best = 0.0
    for y, d in zip(rows, decisions):
        mu_y = 1.0 if d == concept else 0.0
        rel = naive_relation(kind, t_norm, x, y, mins, maxs, variances)
        if t_norm == "lukasiewicz":
            val = max(0.0, rel + mu_y - 1.0)
        else:
            val = min(rel, mu_y)
        best = max(best, val)
    return best


def naive_lower(kind, t_norm, x, rows, decisions, concept):
    mins = rows.min(axis=0)
    maxs = rows.max(axis=0)
    variances = rows.var(axis=0)
    worst = 1.0
    for y, d in zip(rows, decisions):
        mu_y = 1.0 if d == concept else 0.0
        rel = naive_relation(kind, t_norm, x, y, mins, maxs, variances)
        worst = min(worst, min(1.0, 1.0 - rel + mu_y))
    return worst


def naive_auc(labels, scores):
    """Concordant-pair count with ties worth one half."""
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def batch_pca(X):
    """Eigendecomposition of the sample covariance; returns (eigenvalues
    descending, components as rows)."""
    X = np.asarray(X, float)
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / (len(X) - 1)
    w, V = np.linalg.eigh(cov)
    return w[::-1], V[:, ::-1].T


def principal_angles_cos(A, B):
    """Cosines of principal angles between the row spaces of A and B."""
    qa, _ = np.linalg.qr(A.T)
    qb, _ = np.linalg.qr(B.T)
    return np.linalg.svd(qa.T @ qb, compute_uv=False)
