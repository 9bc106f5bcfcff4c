"""Classification and ranking evaluation of spamicity models.

Classification follows a balanced protocol: negatives are subsampled to
the positive count (seeded), then stratified k-fold cross-validation of a
logistic classifier reports precision/recall/F1/accuracy for the spammer
class. Ranking sorts all nodes by descending spamicity and reports the
cumulative fraction of true spammers captured at each rank percentile,
its area under the curve, and precision among the top n.

A ScoreTable is a plain {node_id: spamicity} mapping, higher = more
spammy; ties are broken by node id so every metric is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ValidationError


def _sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))),
                    np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


def _softplus(z):
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


# ---------------------------------------------------------------------
# Logistic classifier
# ---------------------------------------------------------------------

@dataclass
class LinearClassifier:
    weights: np.ndarray
    bias: float

    def predict_proba(self, features) -> np.ndarray:
        x = np.atleast_2d(np.asarray(features, dtype=float))
        return _sigmoid(x @ self.weights + self.bias)

    def predict(self, features) -> np.ndarray:
        return (self.predict_proba(features) >= 0.5).astype(int)


def logistic_loss(weights, bias, features, labels, l2=1e-3):
    """Mean cross-entropy plus L2 penalty on the weights (not the bias)."""
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    z = x @ weights + bias
    return float(np.mean(_softplus(z) - y * z) + 0.5 * l2 * (weights @ weights))


def logistic_gradient(weights, bias, features, labels, l2=1e-3):
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    err = (_sigmoid(x @ weights + bias) - y) / len(y)
    return x.T @ err + l2 * weights, float(err.sum())


def train_linear_classifier(features, labels, l2: float = 1e-3,
                            max_iterations: int = 3000,
                            tolerance: float = 1e-8) -> LinearClassifier:
    """L2-regularized logistic regression by fixed-step gradient descent.

    The step size comes from the loss's Lipschitz constant, so descent is
    monotone and the fit is deterministic.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if x.ndim != 2 or len(x) != len(y):
        raise ConfigError("features must be 2-D and aligned with labels")
    classes = np.unique(y)
    if not np.all(np.isin(classes, (0.0, 1.0))):
        raise ConfigError("labels must be 0/1")
    if len(classes) < 2:
        raise ConfigError("need at least one example per class")

    design = np.hstack([x, np.ones((len(x), 1))])
    lam_max = float(np.linalg.eigvalsh(design.T @ design).max())
    step = 1.0 / (0.25 * lam_max / len(y) + l2)

    w = np.zeros(x.shape[1])
    b = 0.0
    for _ in range(max_iterations):
        grad_w, grad_b = logistic_gradient(w, b, x, y, l2)
        w -= step * grad_w
        b -= step * grad_b
        if max(np.abs(grad_w).max(initial=0.0), abs(grad_b)) < tolerance:
            break
    return LinearClassifier(weights=w, bias=b)


# ---------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------

@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    folds: int
    seed: int


def _fold_metrics(y_true, y_pred):
    tp = int(np.sum((y_pred == 1) & (y_true == 1)))
    fp = int(np.sum((y_pred == 1) & (y_true == 0)))
    fn = int(np.sum((y_pred == 0) & (y_true == 1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    accuracy = float(np.mean(y_pred == y_true))
    return precision, recall, f1, accuracy


def cross_validate(features, labels, folds: int = 10, seed: int = 0,
                   ids=None, l2: float = 1e-3) -> EvalReport:
    """Balanced, stratified k-fold evaluation of the logistic classifier.

    Negatives are subsampled (seeded) to the positive count first. When
    `ids` is given, all randomness operates in id-sorted canonical order,
    so results do not depend on how the examples were arranged.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    n = len(y)
    if ids is not None:
        canonical = sorted(range(n), key=lambda i: str(ids[i]))
    else:
        canonical = list(range(n))
    pos = [i for i in canonical if y[i] == 1]
    neg = [i for i in canonical if y[i] == 0]
    if len(pos) < folds:
        raise ConfigError(f"need at least {folds} positive examples, got {len(pos)}")
    if len(neg) < len(pos):
        raise ConfigError("need at least as many negatives as positives to balance")

    rng = np.random.default_rng(seed)
    neg = list(rng.choice(np.array(neg), size=len(pos), replace=False))
    rng.shuffle(pos)
    rng.shuffle(neg)

    fold_of = {}
    for rank, i in enumerate(pos):
        fold_of[i] = rank % folds
    for rank, i in enumerate(neg):
        fold_of[i] = rank % folds

    chosen = pos + neg
    metrics = np.zeros(4)
    for fold in range(folds):
        train_idx = [i for i in chosen if fold_of[i] != fold]
        test_idx = [i for i in chosen if fold_of[i] == fold]
        clf = train_linear_classifier(x[train_idx], y[train_idx], l2=l2)
        metrics += np.array(_fold_metrics(y[test_idx], clf.predict(x[test_idx])))
    metrics /= folds
    return EvalReport(precision=metrics[0], recall=metrics[1], f1=metrics[2],
                      accuracy=metrics[3], folds=folds, seed=seed)


def out_of_fold_scores(features, labels, ids, folds: int = 5, seed: int = 0,
                       l2: float = 1e-3) -> dict:
    """Spamicity scores for every node from held-out logistic predictions.

    Stratified folds over all nodes; each node is scored by a classifier
    that never saw it.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    n = len(y)
    canonical = sorted(range(n), key=lambda i: str(ids[i]))
    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=int)
    for cls in (0, 1):
        members = [i for i in canonical if y[i] == cls]
        rng.shuffle(members)
        for rank, i in enumerate(members):
            fold_of[i] = rank % folds

    scores = np.empty(n)
    for fold in range(folds):
        train_mask = fold_of != fold
        clf = train_linear_classifier(x[train_mask], y[train_mask], l2=l2)
        scores[~train_mask] = clf.predict_proba(x[~train_mask])
    return {str(ids[i]): float(scores[i]) for i in range(n)}


# ---------------------------------------------------------------------
# Ranking metrics
# ---------------------------------------------------------------------

def _ranked_labels(scores: dict, labels: dict) -> np.ndarray:
    missing = set(scores) - set(labels)
    if missing:
        raise ValidationError(f"labels missing for {len(missing)} scored node(s)")
    for node_id, value in scores.items():
        if not np.isfinite(value):
            raise ValidationError(f"non-finite score for node {node_id!r}")
    order = sorted(scores, key=lambda node_id: (-scores[node_id], node_id))
    return np.array([labels[node_id] for node_id in order], dtype=float)


def suspended_cdf(scores: dict, labels: dict):
    """CDF of true spammers over rank percentiles, plus its trapezoid AUC.

    Nodes are ranked by descending spamicity (ties by id). The cumulative
    capture curve through the rank breakpoints (k/N, captured_k/total) is
    sampled at the 100 integer percentiles; the AUC integrates it from the
    origin. Returns (cdf_points, auc) with cdf_points as
    [(percentile, value)] for percentile 1..100.
    """
    ranked = _ranked_labels(scores, labels)
    total = ranked.sum()
    if total <= 0:
        raise ConfigError("need at least one positive label")
    n = len(ranked)
    xs = np.arange(n + 1) / n
    ys = np.concatenate([[0.0], np.cumsum(ranked) / total])
    grid = np.arange(1, 101) / 100.0
    values = np.interp(grid, xs, ys)
    auc = float(np.trapezoid(np.concatenate([[0.0], values]),
                             np.concatenate([[0.0], grid])))
    cdf_points = [(int(pct), float(val)) for pct, val in zip(range(1, 101), values)]
    return cdf_points, auc


def precision_at_n(scores: dict, labels: dict, n: int) -> float:
    """Fraction of the top n ranked nodes that are true spammers."""
    ranked = _ranked_labels(scores, labels)
    if n < 1 or n > len(ranked):
        raise ConfigError(f"n must be in [1, {len(ranked)}], got {n}")
    return float(ranked[:n].mean())


def compare_models(score_tables: dict, labels: dict, n_values=(100,)) -> dict:
    """Uniform ranking report over several models (insertion order kept).

    Every table must cover the same node set. Requested n values larger
    than the node count are clamped.
    """
    if not score_tables:
        raise ConfigError("no score tables given")
    node_sets = {name: frozenset(table) for name, table in score_tables.items()}
    reference = next(iter(node_sets.values()))
    for name, nodes in node_sets.items():
        if nodes != reference:
            raise ValidationError(f"score table {name!r} covers a different node set")

    n_nodes = len(reference)
    report = {"n_nodes": n_nodes,
              "n_spammers": int(sum(labels[v] for v in reference)),
              "models": {}}
    for name, table in score_tables.items():
        cdf_points, auc = suspended_cdf(table, labels)
        row = {"auc": auc, "precision_at_n": {}, "cdf": cdf_points}
        for n in n_values:
            eff = min(int(n), n_nodes)
            row["precision_at_n"][str(n)] = precision_at_n(table, labels, eff)
        report["models"][name] = row
    return report


# ---------------------------------------------------------------------
# Score files
# ---------------------------------------------------------------------

def save_scores(scores: dict, path):
    """scores.tsv: `node<TAB>score`, higher = more spammy."""
    with open(path, "w", encoding="utf-8") as fh:
        for node_id in scores:
            fh.write(f"{node_id}\t{scores[node_id]:.10g}\n")


def load_scores(path) -> dict:
    scores = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            node_id, value = line.split("\t")
            scores[node_id] = float(value)
    return scores
