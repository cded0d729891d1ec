"""CART-style regression tree with a minimum-leaf-size constraint.

Splits greedily minimize the weighted sum of child target variances; the
only regularizer is min_samples_leaf. Thresholds sit at midpoints between
consecutive distinct sorted feature values and ties are broken toward the
lowest feature index, then the lowest threshold, so fits are deterministic.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import FitError, QueryError


@dataclass(frozen=True)
class TreeHyperparams:
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.min_samples_leaf < 1:
            raise FitError("min_samples_leaf must be >= 1")


@dataclass(frozen=True)
class Tree:
    """Fitted regression tree stored as flat node arrays.

    Internal nodes have feature >= 0; leaves have feature == -1 and carry
    the weighted mean of the training targets routed to them.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray
    n_features: int
    min_samples_leaf: int
    importance: np.ndarray = field(repr=False)  # raw SSE decrease per feature

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def n_leaves(self):
        return int(np.sum(self.feature < 0))

    def leaf_index(self, x):
        """Index of the leaf each row of x lands in (for partition checks)."""
        x = _as_matrix(x, self.n_features)
        out = np.empty(len(x), dtype=np.int64)
        for i, row in enumerate(x):
            node = 0
            while self.feature[node] >= 0:
                if row[self.feature[node]] <= self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[i] = node
        return out


def _as_matrix(x, n_features=None):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise QueryError(f"expected a 2-d feature matrix, got ndim={x.ndim}")
    if n_features is not None and x.shape[1] != n_features:
        raise QueryError(
            f"feature dimension mismatch: model has {n_features}, "
            f"query has {x.shape[1]}")
    return x


def fit_tree(x, targets, hp, sample_weights=None):
    """Fit a regression tree; sample_weights are bootstrap multiplicities."""
    x = _as_matrix(x)
    y = np.asarray(targets, dtype=np.float64)
    if y.ndim != 1 or len(y) != len(x):
        raise FitError("targets must be a vector aligned with the rows of x")
    if not np.all(np.isfinite(y)) or not np.all(np.isfinite(x)):
        raise FitError("features and targets must be finite")
    if sample_weights is None:
        w = np.ones(len(y))
    else:
        w = np.asarray(sample_weights, dtype=np.float64)
        if len(w) != len(y) or np.any(w < 0) or w.sum() == 0:
            raise FitError("sample_weights must be non-negative counts")
        keep = w > 0
        x, y, w = x[keep], y[keep], w[keep]
    if w.sum() < hp.min_samples_leaf:
        raise FitError(
            f"need at least min_samples_leaf={hp.min_samples_leaf} rows, "
            f"got {int(w.sum())}")
    feature, threshold, left, right, value, count, imp = _kernels.build_tree(
        np.ascontiguousarray(x), y, w, float(hp.min_samples_leaf))
    return Tree(feature=feature, threshold=threshold, left=left, right=right,
                value=value, count=count, n_features=x.shape[1],
                min_samples_leaf=hp.min_samples_leaf, importance=imp)


def predict_tree(tree, x_query):
    """Predict a single feature vector; returns the leaf mean."""
    x = np.asarray(x_query, dtype=np.float64).reshape(1, -1)
    return float(predict_tree_batch(tree, x)[0])


def predict_tree_batch(tree, x):
    """Vectorized prediction over the rows of x."""
    x = _as_matrix(x, tree.n_features)
    return _kernels.predict_batch(tree.feature, tree.threshold, tree.left,
                                  tree.right, tree.value,
                                  np.ascontiguousarray(x))
