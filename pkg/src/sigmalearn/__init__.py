"""Forest regression with ensemble-spread uncertainty, and a two-layer
pipeline that feeds the first layer's prediction and its uncertainty into a
second forest to extrapolate a sparsely observed target."""

from .data import (CsvSchema, Dataset, GeneratorConfig, NoiseSpec,
                   NOISE_DISTRIBUTIONS, TARGET_KINDS, generate, read_csv,
                   sample_noise, write_csv)
from .errors import (ConfigurationError, CsvParseError, FitError,
                     MissingExternalDataError, QueryError, SchemaError,
                     SerializationError, SigmalearnError, TuningError,
                     UndefinedMetricError)
from .forest import (DEFAULT_N_TREES, ForestHyperparams, ForestModel,
                     PredictionWithUncertainty, bootstrap_counts,
                     feature_importances, fit_forest, predict_forest,
                     predict_forest_batch, predict_oob)
from .multilayer import (FeatureFlags, MultilayerModel, Standardizer,
                         THETA_GRID_DEGREES, blocking_cv_pipeline,
                         fit_multilayer, importance_of_sigma, layer1_outputs,
                         predict_multilayer, predict_multilayer_batch, rotate,
                         tune_leaf_size, tune_theta)
from .serialize import FORMAT_VERSION, load_model, save_forest, save_multilayer
from .theory import (LengthscaleParams, eq2_lhs, lengthscale_experiment,
                     noise_error, optimal_n, total_squared_error,
                     underfit_error)
from .tree import Tree, TreeHyperparams, fit_tree, predict_tree, predict_tree_batch
from .validation import (TuningResult, blocking_cv, blocking_split, kfold_cv,
                         kfold_indices, mse, r2, score, tune_min_samples_leaf)

__version__ = "1.0.0"

__all__ = [
    "CsvSchema", "Dataset", "GeneratorConfig", "NoiseSpec",
    "NOISE_DISTRIBUTIONS", "TARGET_KINDS", "generate", "read_csv",
    "sample_noise", "write_csv",
    "ConfigurationError", "CsvParseError", "FitError",
    "MissingExternalDataError", "QueryError", "SchemaError",
    "SerializationError", "SigmalearnError", "TuningError",
    "UndefinedMetricError",
    "DEFAULT_N_TREES", "ForestHyperparams", "ForestModel",
    "PredictionWithUncertainty", "bootstrap_counts", "feature_importances",
    "fit_forest", "predict_forest", "predict_forest_batch", "predict_oob",
    "FeatureFlags", "MultilayerModel", "Standardizer", "THETA_GRID_DEGREES",
    "blocking_cv_pipeline", "fit_multilayer", "importance_of_sigma",
    "layer1_outputs", "predict_multilayer", "predict_multilayer_batch",
    "rotate", "tune_leaf_size", "tune_theta",
    "FORMAT_VERSION", "load_model", "save_forest", "save_multilayer",
    "LengthscaleParams", "eq2_lhs", "lengthscale_experiment", "noise_error",
    "optimal_n", "total_squared_error", "underfit_error",
    "Tree", "TreeHyperparams", "fit_tree", "predict_tree",
    "predict_tree_batch",
    "TuningResult", "blocking_cv", "blocking_split", "kfold_cv",
    "kfold_indices", "mse", "r2", "score", "tune_min_samples_leaf",
    "__version__",
]
