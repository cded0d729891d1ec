"""Two-layer forest: layer 1 learns X -> Y and emits (Y, sigma_Y); layer 2
learns the final target Z from X and the standardized, optionally rotated,
(Y, sigma_Y) channels. Both layers share identical hyperparameters.

Layer-2 training features come from layer-1 predictions at the training X
values: in-sample ensemble outputs by default, out-of-bag outputs when
oob_mode is set (in-sample sigma_Y is biased low; both modes are supported).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import FitError, QueryError, TuningError, UndefinedMetricError
from .forest import (ForestHyperparams, PredictionWithUncertainty, fit_forest,
                     predict_forest_batch, predict_oob)
from .validation import TuningResult, blocking_split, default_candidate_grid, r2, select_best

THETA_GRID_DEGREES = tuple(range(0, 91, 5))


@dataclass(frozen=True)
class FeatureFlags:
    use_x: bool = True
    use_y: bool = False
    use_sigma_y: bool = False

    def __post_init__(self):
        if not (self.use_x or self.use_y or self.use_sigma_y):
            raise FitError("at least one feature flag must be enabled")

    @property
    def needs_layer1(self):
        return self.use_y or self.use_sigma_y


@dataclass(frozen=True)
class Standardizer:
    mean_y: float = 0.0
    std_y: float = 1.0
    mean_sigma: float = 0.0
    std_sigma: float = 1.0

    @classmethod
    def fit(cls, y, sigma):
        # A zero-spread channel is passed through centered only.
        return cls(mean_y=float(np.mean(y)),
                   std_y=float(np.std(y)) or 1.0,
                   mean_sigma=float(np.mean(sigma)),
                   std_sigma=float(np.std(sigma)) or 1.0)

    def apply(self, y, sigma):
        return ((y - self.mean_y) / self.std_y,
                (sigma - self.mean_sigma) / self.std_sigma)


def rotate(y, sigma, theta_degrees):
    """Rotate (y, sigma) in the Y-sigma_Y plane by theta (degrees)."""
    if not 0.0 <= theta_degrees <= 90.0:
        raise FitError("theta must be in [0, 90] degrees")
    t = math.radians(theta_degrees)
    c, s = math.cos(t), math.sin(t)
    return c * y - s * sigma, s * y + c * sigma


@dataclass(frozen=True)
class MultilayerModel:
    layer1: object  # ForestModel or None when only X is used
    layer2: object  # ForestModel
    flags: FeatureFlags
    standardizer: Standardizer | None
    theta: float | None
    hyperparams: ForestHyperparams
    oob_mode: bool = False

    def sigma_channel_index(self):
        if not self.flags.use_sigma_y:
            raise QueryError("model was fitted without the sigma_Y channel")
        idx = self.layer2.n_features - 1
        return idx


def _assemble(x, y_hat, sigma_hat, flags, standardizer, theta):
    cols = []
    if flags.use_x:
        cols.append(x)
    if flags.needs_layer1:
        ys, ss = standardizer.apply(y_hat, sigma_hat)
        if theta is not None and flags.use_y and flags.use_sigma_y:
            ys, ss = rotate(ys, ss, theta)
        if flags.use_y:
            cols.append(ys.reshape(-1, 1))
        if flags.use_sigma_y:
            cols.append(ss.reshape(-1, 1))
    return np.hstack(cols)


def fit_multilayer(train, flags, hp, theta=None, oob_mode=False):
    """Fit both layers on a Dataset with Y everywhere and Z where unmasked."""
    if train.z is None:
        raise FitError("training dataset has no final target column")
    if theta is not None and not (flags.use_y and flags.use_sigma_y):
        raise FitError("rotation requires both use_y and use_sigma_y")
    mask = train.z_mask
    if mask.sum() < hp.min_samples_leaf:
        raise FitError(
            f"need at least min_samples_leaf={hp.min_samples_leaf} rows with "
            f"final-target values, got {int(mask.sum())}")

    layer1 = None
    standardizer = None
    if flags.needs_layer1:
        if train.y is None:
            raise FitError("intermediate target column required for these flags")
        layer1 = fit_forest(train.x, train.y, hp)
        if oob_mode:
            y_hat, sigma_hat = predict_oob(layer1, train.x)
        else:
            y_hat, sigma_hat = predict_forest_batch(layer1, train.x)
        # Standardization uses the full training X-range: layer-1 outputs
        # exist even where Z is masked.
        standardizer = Standardizer.fit(y_hat, sigma_hat)
        feats = _assemble(train.x, y_hat, sigma_hat, flags, standardizer, theta)
    else:
        feats = train.x

    layer2 = fit_forest(feats[mask], train.z[mask], hp)
    return MultilayerModel(layer1=layer1, layer2=layer2, flags=flags,
                           standardizer=standardizer, theta=theta,
                           hyperparams=hp, oob_mode=oob_mode)


def predict_multilayer_batch(model, x):
    """Z means and ensemble stds for the rows of x."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if model.flags.needs_layer1:
        y_hat, sigma_hat = predict_forest_batch(model.layer1, x)
        feats = _assemble(x, y_hat, sigma_hat, model.flags,
                          model.standardizer, model.theta)
    else:
        feats = x
    return predict_forest_batch(model.layer2, feats)


def predict_multilayer(model, x_query):
    mean, std = predict_multilayer_batch(
        model, np.atleast_2d(np.asarray(x_query, dtype=np.float64)))
    return PredictionWithUncertainty(mean=float(mean[0]), std=float(std[0]))


def layer1_outputs(model, x):
    """Intermediate (Y, sigma_Y) predictions, unstandardized."""
    if model.layer1 is None:
        raise QueryError("model has no first layer")
    return predict_forest_batch(model.layer1, x)


def blocking_cv_pipeline(train, flags, hp, theta=None, oob_mode=False):
    """Blocking-CV R^2 of the full pipeline on the unmasked training rows.

    The rows are sorted by X and cut into three contiguous equal blocks; each
    outermost block in turn is held out and scored against a pipeline fitted
    on the remaining two blocks, and the two scores are averaged. Holding out
    the extremes probes extrapolation along X, which is what the tuned model
    is used for.
    """
    rows = np.flatnonzero(train.z_mask)
    sub = train.subset(rows)
    order = np.argsort(sub.x[:, 0], kind="stable")
    blocks = np.array_split(np.arange(sub.n_rows), 3)
    scores = []
    for val_block in (blocks[0], blocks[2]):
        tr_pos = np.setdiff1d(np.arange(sub.n_rows), val_block)
        tr, va = order[tr_pos], order[val_block]
        cv_mask = np.zeros(sub.n_rows, dtype=bool)
        cv_mask[tr] = True
        model = fit_multilayer(sub.with_mask(cv_mask), flags,
                               _clamped(hp, int(cv_mask.sum())), theta=theta,
                               oob_mode=oob_mode)
        pred, _ = predict_multilayer_batch(model, sub.x[va])
        scores.append(r2(sub.z[va], pred))
    return float(np.mean(scores))


def _clamped(hp, n_train):
    if hp.min_samples_leaf <= n_train:
        return hp
    from dataclasses import replace
    return replace(hp, min_samples_leaf=n_train)


def tune_leaf_size(train, flags, candidates=None, n_trees=125, seed=0,
                   theta=None, oob_mode=False):
    """Grid-search the shared leaf size by blocking-CV R^2 of the pipeline."""
    n_train = int(train.z_mask.sum())
    if candidates is None:
        candidates = default_candidate_grid(n_train)
    table = []
    for cand in candidates:
        if cand > n_train:
            continue
        hp = ForestHyperparams(n_trees=n_trees, min_samples_leaf=int(cand),
                               seed=seed)
        try:
            s = blocking_cv_pipeline(train, flags, hp, theta=theta,
                                     oob_mode=oob_mode)
        except UndefinedMetricError:
            continue
        table.append((int(cand), s))
    if not table:
        raise TuningError("no leaf-size candidate could be evaluated")
    best, best_score = select_best(table, "r2")
    return TuningResult(best_min_samples_leaf=best, cv_score=best_score,
                        score_table=tuple(table))


def tune_theta(train, flags, hp, grid=THETA_GRID_DEGREES, oob_mode=False,
               cv_repeats=5):
    """Pick the rotation angle maximizing blocking-CV R^2; ties toward 0.

    The CV score for a single forest seed is noisy enough to scramble the
    angle ranking, so each angle is scored with ``cv_repeats`` forest seeds
    and the scores averaged. Averaged scores still fluctuate, so angles whose
    mean score sits within two median per-angle standard deviations of the
    best are treated as statistical ties, resolved toward the smallest angle.
    """
    if not (flags.use_y and flags.use_sigma_y):
        raise TuningError("theta tuning needs both use_y and use_sigma_y")
    if not grid:
        raise TuningError("empty theta grid")
    if cv_repeats < 1:
        raise TuningError("cv_repeats must be at least 1")
    from dataclasses import replace
    table, spreads = [], []
    for theta in grid:
        scores = [
            blocking_cv_pipeline(train, flags, replace(hp, seed=hp.seed + r),
                                 theta=float(theta), oob_mode=oob_mode)
            for r in range(cv_repeats)
        ]
        table.append((float(theta), float(np.mean(scores))))
        spreads.append(float(np.std(scores)))
    best_score = max(s for _, s in table)
    tie_tolerance = max(0.01, 2.0 * float(np.median(spreads)))
    best_theta = min(t for t, s in table if s >= best_score - tie_tolerance)
    return best_theta, best_score, tuple(table)


def importance_of_sigma(model):
    """Layer-2 importance mass on the sigma_Y channel.

    With theta = 0 (or no rotation) the channel maps directly to sigma_Y;
    for theta != 0 this is the importance of the rotated sigma' channel.
    """
    return float(model.layer2.importances[model.sigma_channel_index()])
