"""Exception hierarchy shared across the package."""


class SigmalearnError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SigmalearnError):
    """Invalid generator or noise configuration."""


class SchemaError(SigmalearnError):
    """CSV header does not provide the required columns."""


class CsvParseError(SigmalearnError):
    """Non-numeric or malformed cell in a CSV file."""


class FitError(SigmalearnError):
    """Model cannot be fitted on the given data."""


class QueryError(SigmalearnError):
    """Prediction query is incompatible with the fitted model."""


class UndefinedMetricError(SigmalearnError):
    """Metric is undefined for the given inputs (e.g. constant truth)."""


class TuningError(SigmalearnError):
    """Hyperparameter search could not evaluate any candidate."""


class SerializationError(SigmalearnError):
    """Model file is malformed or has an unsupported version."""


class MissingExternalDataError(SigmalearnError):
    """A required user-supplied data file was not provided or not found."""
