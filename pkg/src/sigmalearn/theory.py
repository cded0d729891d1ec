"""Closed-form averaging-lengthscale law for noisy linear data and the
numerical experiment that checks it against hyperparameter tuning.

For targets that rise by delta_y per point with noise of scale sigma, a leaf
of n points trades underfitting bias against noise averaging; the stationary
point of the total squared CV error links the tuned leaf size to
(sigma / delta_y)^2 with unit slope.
"""

import math
from dataclasses import dataclass

import numpy as np

from .data import GeneratorConfig, NoiseSpec, generate
from .errors import ConfigurationError
from .validation import tune_min_samples_leaf


@dataclass(frozen=True)
class LengthscaleParams:
    n: int
    k: int = 5
    delta_y: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.n < 0:
            raise ConfigurationError("n must be >= 0")
        if self.k < 2:
            raise ConfigurationError("k must be >= 2")
        if self.delta_y < 0 or self.sigma < 0:
            raise ConfigurationError("delta_y and sigma must be >= 0")


def underfit_error(p):
    """Average CV error contribution from underfitting the linear trend."""
    return math.sqrt(p.n ** 2 * p.delta_y ** 2 / 12.0
                     + p.n * p.k ** 2 * p.delta_y ** 2 / (12.0 * (p.k - 1)))


def noise_error(p):
    """CV error contribution from noise in the leaf-mean prediction."""
    if p.n == 0:
        return math.inf if p.sigma > 0 else 0.0
    return p.sigma / math.sqrt(p.n * (p.k - 1) / p.k)


def eq2_lhs(n, k, delta_y):
    """Left-hand side of the stationarity relation; equals sigma^2 at the
    optimal leaf size. At k=5, delta_y=1 this is 25n^3/96 + 125n^2/192."""
    if k < 2:
        raise ConfigurationError("k must be >= 2")
    return (n ** 3 * k ** 2 * delta_y ** 2 / (6.0 * (k - 1) ** 2)
            + n ** 2 * k ** 3 * delta_y ** 2 / (12.0 * (k - 1) ** 2))


def total_squared_error(p):
    return underfit_error(p) ** 2 + noise_error(p) ** 2


def optimal_n(k, delta_y, sigma, n_max=None):
    """Exact integer scan for the leaf size minimizing the total squared
    error; sidesteps the k << n approximation at small n."""
    if delta_y <= 0:
        raise ConfigurationError("delta_y must be > 0")
    if sigma == 0:
        return 1
    if n_max is None:
        # Continuous root scales like (6 sigma^2 / delta_y^2)^(1/3); scan
        # comfortably past it.
        n_max = max(10, int(3 * (6.0 * sigma ** 2 / delta_y ** 2) ** (1.0 / 3.0)) + 10)
    best_n, best_err = 1, math.inf
    for n in range(1, n_max + 1):
        err = total_squared_error(LengthscaleParams(n=n, k=k, delta_y=delta_y,
                                                    sigma=sigma))
        if err < best_err:
            best_n, best_err = n, err
    return best_n


def lengthscale_experiment(sigma_list, n_points=300, x_min=0.0, x_max=10.0,
                           k=5, seed=0, n_trees=25, candidates=None,
                           repeats=5):
    """For each sigma: generate Y ~ N(X, sigma^2) on an even grid, tune
    min_samples_leaf by k-fold CV MSE, record the stationarity LHS at the
    tuned leaf size against (sigma/delta_y)^2; fit a line through the points.

    A single tuned leaf size is noisy and the LHS is cubic in it, so each
    sigma is tuned on ``repeats`` independently generated datasets and the
    median leaf size is recorded.

    Returns (rows, slope, slope_stderr, intercept) where rows are
    (sigma, n_opt, ratio_sq, lhs) tuples.
    """
    delta_y = (x_max - x_min) / (n_points - 1)  # unit slope linear trend
    rows = []
    for i, sigma in enumerate(sigma_list):
        tuned = []
        for r in range(repeats):
            run_seed = seed + i + 1000 * r
            config = GeneratorConfig(n_points=n_points,
                                     target_kind="linear_plus_noise",
                                     x_min=x_min, x_max=x_max, seed=run_seed,
                                     noise=NoiseSpec(scale=float(sigma)))
            ds = generate(config)
            result = tune_min_samples_leaf(ds.x, ds.y, candidates=candidates,
                                           scheme="kfold", k=k,
                                           objective="mse", seed=run_seed,
                                           n_trees=n_trees)
            tuned.append(result.best_min_samples_leaf)
        n_opt = int(round(float(np.median(tuned))))
        ratio_sq = (sigma / delta_y) ** 2
        # The law equates the pure-n polynomial (delta_y = 1) to (sigma/delta_y)^2.
        rows.append((float(sigma), n_opt, ratio_sq, eq2_lhs(n_opt, k, 1.0)))
    slope, stderr, intercept = _line_fit([r[2] for r in rows],
                                         [r[3] for r in rows])
    return rows, slope, stderr, intercept


def _line_fit(xs, ys):
    """Least-squares line y = a x + b; returns (a, stderr_a, b)."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    if n > 2:
        stderr = math.sqrt(np.sum(resid ** 2) / (n - 2) / sxx)
    else:
        stderr = 0.0
    return float(slope), float(stderr), float(intercept)
