"""Metrics, k-fold and blocking cross-validation, and leaf-size tuning."""

from dataclasses import dataclass

import numpy as np

from .errors import TuningError, UndefinedMetricError
from .forest import ForestHyperparams, fit_forest, predict_forest_batch

METRICS = ("r2", "mse")
BLOCKING_N_BLOCKS = 3


def r2(y_true, y_pred):
    """Coefficient of determination, 1 - SS_res / SS_tot."""
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    if yt.shape != yp.shape or yt.size == 0:
        raise UndefinedMetricError("r2 needs equal, non-empty vectors")
    ss_tot = np.sum((yt - yt.mean()) ** 2)
    if ss_tot == 0.0:
        raise UndefinedMetricError("r2 is undefined for constant y_true")
    return float(1.0 - np.sum((yt - yp) ** 2) / ss_tot)


def mse(y_true, y_pred):
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    if yt.shape != yp.shape or yt.size == 0:
        raise UndefinedMetricError("mse needs equal, non-empty vectors")
    return float(np.mean((yt - yp) ** 2))


def score(metric, y_true, y_pred):
    if metric == "r2":
        return r2(y_true, y_pred)
    if metric == "mse":
        return mse(y_true, y_pred)
    raise UndefinedMetricError(f"unknown metric {metric!r}")


def _clamp_leaf(hp, n_train):
    """Leaf sizes above the CV-training size degrade to a single-leaf tree
    rather than failing, so candidates up to the full row count stay legal."""
    if hp.min_samples_leaf <= n_train:
        return hp
    from dataclasses import replace
    return replace(hp, min_samples_leaf=n_train)


def kfold_indices(n, k, seed):
    """Shuffle once, split into k near-equal folds; exact disjoint cover."""
    if k < 2 or k > n:
        raise TuningError(f"k must be in [2, n_rows]; got k={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(fold) for fold in np.array_split(perm, k)]


def kfold_cv(x, targets, hp, k=5, metric="r2", seed=0):
    """Mean held-out score over k forest fits."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    y = np.asarray(targets, dtype=np.float64)
    scores = []
    for fold in kfold_indices(len(y), k, seed):
        train = np.setdiff1d(np.arange(len(y)), fold)
        model = fit_forest(x[train], y[train], _clamp_leaf(hp, len(train)))
        pred, _ = predict_forest_batch(model, x[fold])
        scores.append(score(metric, y[fold], pred))
    return float(np.mean(scores))


def blocking_split(n):
    """Three contiguous blocks over sorted order: train middle, validate outer.

    Deterministic, independent of any seed; only the X-order matters.
    """
    if n < BLOCKING_N_BLOCKS:
        raise TuningError(f"blocking CV needs >= {BLOCKING_N_BLOCKS} rows")
    blocks = np.array_split(np.arange(n), BLOCKING_N_BLOCKS)
    train = blocks[1]
    val = np.concatenate([blocks[0], blocks[2]])
    return train, val


def blocking_cv(x, targets, hp, metric="r2"):
    """Blocking CV for a plain forest: sort by the first feature, train on the
    middle block, score on the union of the two outer blocks."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    y = np.asarray(targets, dtype=np.float64)
    order = np.argsort(x[:, 0], kind="stable")
    train, val = blocking_split(len(y))
    tr, va = order[train], order[val]
    model = fit_forest(x[tr], y[tr], _clamp_leaf(hp, len(tr)))
    pred, _ = predict_forest_batch(model, x[va])
    return score(metric, y[va], pred)


@dataclass(frozen=True)
class TuningResult:
    best_min_samples_leaf: int
    cv_score: float
    score_table: tuple  # of (candidate, score) pairs


def default_candidate_grid(n_rows, max_candidates=40):
    """All integers 1..N for small N, else a geometric grid of ~40 values."""
    if n_rows <= 200:
        return list(range(1, n_rows + 1))
    grid = np.unique(np.geomspace(1, n_rows, max_candidates).round().astype(int))
    return [int(c) for c in grid]


def select_best(score_table, objective):
    """Best candidate for the objective; ties go to the larger leaf size."""
    if objective == "r2":
        key = lambda cs: (cs[1], cs[0])
    else:
        key = lambda cs: (-cs[1], cs[0])
    return max(score_table, key=key)


def tune_min_samples_leaf(x, targets, candidates=None, scheme="kfold", k=5,
                          objective="r2", seed=0, n_trees=125):
    """Grid-search min_samples_leaf under the chosen CV scheme.

    Maximizes r2 or minimizes mse; ties break toward the larger (smoother)
    leaf size. Candidates larger than the row count are skipped.
    """
    y = np.asarray(targets, dtype=np.float64)
    if candidates is None:
        candidates = default_candidate_grid(len(y))
    table = []
    for cand in candidates:
        if cand > len(y):
            continue
        hp = ForestHyperparams(n_trees=n_trees, min_samples_leaf=int(cand),
                               seed=seed)
        try:
            if scheme == "kfold":
                s = kfold_cv(x, y, hp, k=k, metric=objective, seed=seed)
            else:
                s = blocking_cv(x, y, hp, metric=objective)
        except UndefinedMetricError:
            continue
        table.append((int(cand), s))
    if not table:
        raise TuningError("no candidate could be evaluated")
    best, best_score = select_best(table, objective)
    return TuningResult(best_min_samples_leaf=best, cv_score=best_score,
                        score_table=tuple(table))
