"""Data model, synthetic benchmark generators, and CSV ingestion/emission.

Generated X grids are evenly spaced, so the mean target increment per point
is well defined for the averaging-lengthscale analysis. Rows where the final
target is unavailable keep their ground-truth value but are flagged off in
z_mask, which lets validation score extrapolations against the truth.
"""

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, CsvParseError, SchemaError

TARGET_KINDS = ("white_noise", "linear_plus_noise", "cos2_mediated",
                "cos2_sigma_encoded", "cos2_combined")
NOISE_DISTRIBUTIONS = ("gaussian", "cauchy", "uniform", "exponential")

# Default X ranges per target kind; cos2 kinds derive theirs from `periods`.
_DEFAULT_RANGES = {"white_noise": (0.0, 1.0), "linear_plus_noise": (0.0, 10.0)}
COS2_VALIDATION_XMAX = 0.5


@dataclass(frozen=True)
class NoiseSpec:
    """Noise family with moment-matched parameterization.

    Uniform and exponential draws have mean == location and std == scale;
    Cauchy has no moments, so location/scale are used directly.
    """

    distribution: str = "gaussian"
    location: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.distribution not in NOISE_DISTRIBUTIONS:
            raise ConfigurationError(f"unknown distribution {self.distribution!r}")
        if self.scale < 0:
            raise ConfigurationError("noise scale must be >= 0")


@dataclass(frozen=True)
class GeneratorConfig:
    n_points: int = 100
    target_kind: str = "white_noise"
    x_min: float | None = None
    x_max: float | None = None
    b: float = 1.0
    periods: float = 1.0
    seed: int = 0
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def __post_init__(self):
        if self.target_kind not in TARGET_KINDS:
            raise ConfigurationError(f"unknown target kind {self.target_kind!r}")
        if self.n_points < 2:
            raise ConfigurationError("n_points must be >= 2")
        if self.b < 0:
            raise ConfigurationError("b must be >= 0")
        if self.periods <= 0:
            raise ConfigurationError("periods must be > 0")
        lo, hi = self.resolved_range()
        if not lo < hi:
            raise ConfigurationError("x_min must be < x_max")

    def resolved_range(self):
        if self.x_min is not None and self.x_max is not None:
            return self.x_min, self.x_max
        if self.target_kind in _DEFAULT_RANGES:
            lo, hi = _DEFAULT_RANGES[self.target_kind]
        else:
            # Training range -periods < X < 0, validation up to +0.5.
            lo, hi = -self.periods, COS2_VALIDATION_XMAX
        return (self.x_min if self.x_min is not None else lo,
                self.x_max if self.x_max is not None else hi)


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray | None = None
    z: np.ndarray | None = None
    z_mask: np.ndarray | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        object.__setattr__(self, "x", x)
        n = len(x)
        if n < 1:
            raise ConfigurationError("dataset must have at least one row")
        for name in ("y", "z"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=np.float64)
                if v.shape != (n,):
                    raise ConfigurationError(f"{name} must have {n} rows")
                object.__setattr__(self, name, v)
        if self.z is not None:
            mask = self.z_mask
            mask = np.ones(n, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
            if mask.shape != (n,):
                raise ConfigurationError("z_mask length must equal row count")
            object.__setattr__(self, "z_mask", mask)
        elif self.z_mask is not None:
            raise ConfigurationError("z_mask requires a z column")
        self._check_finite()

    def _check_finite(self):
        if not np.all(np.isfinite(self.x)):
            raise ConfigurationError("non-finite values in x")
        if self.y is not None and not np.all(np.isfinite(self.y)):
            raise ConfigurationError("non-finite values in y")
        if self.z is not None and not np.all(np.isfinite(self.z[self.z_mask])):
            raise ConfigurationError("non-finite values in unmasked z")

    @property
    def n_rows(self):
        return len(self.x)

    @property
    def n_features(self):
        return self.x.shape[1]

    def subset(self, rows):
        return Dataset(
            x=self.x[rows],
            y=None if self.y is None else self.y[rows],
            z=None if self.z is None else self.z[rows],
            z_mask=None if self.z_mask is None else self.z_mask[rows])

    def with_mask(self, z_mask):
        return replace(self, z_mask=np.asarray(z_mask, dtype=bool))


def sample_noise(spec, n, seed):
    """n i.i.d. draws from the spec's family; deterministic per seed."""
    if n < 1:
        raise ConfigurationError("n must be >= 1")
    rng = np.random.default_rng(seed)
    return _draw(spec, rng, n)


def _draw(spec, rng, n):
    mu, s = spec.location, spec.scale
    if spec.distribution == "gaussian":
        return mu + s * rng.standard_normal(n)
    if spec.distribution == "cauchy":
        return mu + s * rng.standard_cauchy(n)
    if spec.distribution == "uniform":
        half = math.sqrt(3.0) * s
        return rng.uniform(mu - half, mu + half, n)
    # Exponential with rate 1/s, shifted so the mean lands on mu.
    if s == 0:
        return np.full(n, mu)
    return (mu - s) + rng.exponential(s, n)


def _unit_noise(distribution, rng, n):
    """Zero-location, unit-scale draws used for amplitude-modulated targets."""
    return _draw(NoiseSpec(distribution=distribution, location=0.0, scale=1.0),
                 rng, n)


def generate(config):
    """Build the synthetic dataset described by config (bit-reproducible)."""
    lo, hi = config.resolved_range()
    x = np.linspace(lo, hi, config.n_points)
    rng = np.random.default_rng(config.seed)
    kind = config.target_kind
    dist = config.noise.distribution

    if kind == "white_noise":
        y = _unit_noise(dist, rng, config.n_points)
        return Dataset(x=x, y=y)
    if kind == "linear_plus_noise":
        y = x + config.noise.scale * _unit_noise(dist, rng, config.n_points)
        return Dataset(x=x, y=y)

    z = np.cos(np.pi * x) ** 2
    z_mask = x <= 0.0
    if kind == "cos2_mediated":
        y = z.copy()
    elif kind == "cos2_sigma_encoded":
        y = np.abs(z) * _unit_noise(dist, rng, config.n_points)
    else:  # cos2_combined
        y = z + config.b * np.abs(z) * _unit_noise(dist, rng, config.n_points)
    return Dataset(x=x, y=y, z=z, z_mask=z_mask)


_FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class CsvSchema:
    """Column names used when reading a dataset from CSV."""

    x: tuple = ("x",)
    y: str | None = "y"
    z: str | None = "z"
    z_mask: str | None = "z_mask"


def write_csv(dataset, path):
    """Emit dataset as CSV (comma, dot decimal, UTF-8, one header row).

    Masked rows without a stored ground-truth value are written as blank z
    cells; the z_mask column is always emitted when z is present so the
    ground-truth-under-mask case round-trips losslessly.
    """
    if dataset.n_rows < 1:
        raise ConfigurationError("refusing to write a dataset with no rows")
    header = [f"x{i}" for i in range(dataset.n_features)] if dataset.n_features > 1 else ["x"]
    if dataset.y is not None:
        header.append("y")
    if dataset.z is not None:
        header += ["z", "z_mask"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(dataset.n_rows):
            row = [_FLOAT_FMT % v for v in dataset.x[i]]
            if dataset.y is not None:
                row.append(_FLOAT_FMT % dataset.y[i])
            if dataset.z is not None:
                zv = dataset.z[i]
                if not dataset.z_mask[i] and not np.isfinite(zv):
                    row.append("")
                else:
                    row.append(_FLOAT_FMT % zv)
                row.append("1" if dataset.z_mask[i] else "0")
            writer.writerow(row)


def read_csv(path, schema=None):
    """Read a dataset from CSV; empty z cells mark the row as masked."""
    schema = schema or CsvSchema()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        col = {name: i for i, name in enumerate(header)}

        x_names = list(schema.x)
        if len(x_names) == 1 and x_names[0] not in col:
            # Accept the multi-feature spelling x0, x1, ... for a bare "x".
            auto = [h for h in header if h.startswith(x_names[0]) and
                    h[len(x_names[0]):].isdigit()]
            if auto:
                x_names = sorted(auto, key=lambda h: int(h[len(schema.x[0]):]))
        missing = [c for c in x_names if c not in col]
        if missing:
            raise SchemaError(f"{path}: missing feature column(s) {missing}")
        y_idx = col.get(schema.y) if schema.y else None
        z_idx = col.get(schema.z) if schema.z else None
        m_idx = col.get(schema.z_mask) if schema.z_mask else None

        xs, ys, zs, mask = [], [], [], []
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            xs.append([_parse_cell(row, col[c], c, rownum, path) for c in x_names])
            if y_idx is not None:
                ys.append(_parse_cell(row, y_idx, schema.y, rownum, path))
            if z_idx is not None:
                cell = row[z_idx].strip() if z_idx < len(row) else ""
                if cell == "":
                    zs.append(np.nan)
                    mask.append(False)
                else:
                    zs.append(_parse_cell(row, z_idx, schema.z, rownum, path))
                    if m_idx is not None:
                        mask.append(row[m_idx].strip() not in ("0", "false", "False"))
                    else:
                        mask.append(True)
    if not xs:
        raise SchemaError(f"{path}: no data rows")
    return Dataset(
        x=np.asarray(xs, dtype=np.float64),
        y=np.asarray(ys) if y_idx is not None else None,
        z=np.asarray(zs) if z_idx is not None else None,
        z_mask=np.asarray(mask, dtype=bool) if z_idx is not None else None)


def _parse_cell(row, idx, name, rownum, path):
    cell = row[idx].strip() if idx < len(row) else ""
    try:
        return float(cell)
    except ValueError:
        raise CsvParseError(
            f"{path}: row {rownum}: non-numeric value {cell!r} in column "
            f"{name!r}") from None
