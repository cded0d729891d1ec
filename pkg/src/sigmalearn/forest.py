"""Bootstrap forest: mean prediction, ensemble-spread uncertainty, importances.

Each tree is fitted on N rows drawn with replacement; the bootstrap is the
only source of randomness (no feature subsampling at splits). The spread of
the individual tree predictions is reported as the prediction uncertainty.
"""

from dataclasses import dataclass

import numpy as np

from .errors import FitError
from .tree import TreeHyperparams, fit_tree, predict_tree_batch, _as_matrix

DEFAULT_N_TREES = 125


@dataclass(frozen=True)
class ForestHyperparams:
    n_trees: int = DEFAULT_N_TREES
    min_samples_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise FitError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise FitError("min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class PredictionWithUncertainty:
    mean: float
    std: float


@dataclass(frozen=True)
class ForestModel:
    trees: tuple
    hyperparams: ForestHyperparams
    n_features: int
    importances: np.ndarray
    oob_masks: np.ndarray  # (n_trees, n_rows) bool, True = row not drawn


def _tree_rng(seed, tree_index):
    # Counter-based derivation: adding trees never reshuffles earlier ones.
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(tree_index)]))


def bootstrap_counts(n_rows, seed, tree_index):
    """Multiplicity of each training row in the bootstrap draw for one tree."""
    rng = _tree_rng(seed, tree_index)
    draws = rng.integers(0, n_rows, size=n_rows)
    return np.bincount(draws, minlength=n_rows)


def fit_forest(x, targets, hp):
    """Fit hp.n_trees trees, each on an independent bootstrap resample."""
    x = _as_matrix(x)
    y = np.asarray(targets, dtype=np.float64)
    n = len(y)
    if n < hp.min_samples_leaf:
        raise FitError(
            f"need at least min_samples_leaf={hp.min_samples_leaf} rows, got {n}")
    tree_hp = TreeHyperparams(min_samples_leaf=hp.min_samples_leaf)
    trees = []
    oob = np.empty((hp.n_trees, n), dtype=bool)
    for i in range(hp.n_trees):
        counts = bootstrap_counts(n, hp.seed, i)
        oob[i] = counts == 0
        trees.append(fit_tree(x, y, tree_hp, sample_weights=counts))
    importances = _aggregate_importances(trees, x.shape[1])
    return ForestModel(trees=tuple(trees), hyperparams=hp,
                       n_features=x.shape[1], importances=importances,
                       oob_masks=oob)


def _aggregate_importances(trees, n_features):
    total = np.zeros(n_features)
    for t in trees:
        total += t.importance
    total /= len(trees)
    s = total.sum()
    if s <= 0.0:
        # No split anywhere: the declared convention is a uniform vector.
        return np.full(n_features, 1.0 / n_features)
    return total / s


def tree_prediction_matrix(model, x):
    """(n_trees, n_queries) matrix of individual tree predictions."""
    x = _as_matrix(x, model.n_features)
    out = np.empty((len(model.trees), len(x)))
    for i, t in enumerate(model.trees):
        out[i] = predict_tree_batch(t, x)
    return out


def predict_forest(model, x_query):
    """Ensemble mean and population std of the tree predictions for one query."""
    preds = tree_prediction_matrix(model, np.atleast_2d(np.asarray(x_query, dtype=np.float64)))[:, 0]
    return PredictionWithUncertainty(mean=float(preds.mean()),
                                     std=float(preds.std()))


def predict_forest_batch(model, x, n_trees=None):
    """Means and stds for many queries; n_trees restricts to the first trees."""
    preds = tree_prediction_matrix(model, x)
    if n_trees is not None:
        if not 1 <= n_trees <= len(model.trees):
            raise FitError(f"n_trees must be in [1, {len(model.trees)}]")
        preds = preds[:n_trees]
    return preds.mean(axis=0), preds.std(axis=0)


def predict_oob(model, x_train):
    """Per-row mean/std using only trees whose bootstrap omitted that row.

    Rows in every bootstrap (no out-of-bag tree) fall back to the full
    ensemble; at 125 trees this is vanishingly rare.
    """
    preds = tree_prediction_matrix(model, x_train)
    n = preds.shape[1]
    means = np.empty(n)
    stds = np.empty(n)
    for r in range(n):
        sel = model.oob_masks[:, r]
        col = preds[sel, r] if sel.any() else preds[:, r]
        means[r] = col.mean()
        stds[r] = col.std()
    return means, stds


def feature_importances(model):
    """Normalized impurity-decrease importances (sum to 1)."""
    return model.importances.copy()
