"""Synthetic datasets with optional planted contamination.

Every generator draws its clean rows first and appends the contaminated
rows afterwards, marking them in ``Dataset.outlier_mask``.  All randomness
comes from one ``numpy`` generator seeded by ``GenConfig.seed``, so a given
config always produces the same rows.

The CSV helpers write and read the exchange format used by the command line
tool: a header ``z1,...,zd,y,is_outlier`` followed by one row per sample,
floats rendered with 17 significant digits so they round-trip exactly.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .losses import Dataset


class Problem(Enum):
    """Available synthetic problems."""

    GAUSSIAN_BLOBS = "gaussian-blobs"
    LINEAR_MODEL = "linear-model"
    TWO_MOONS = "two-moons"
    HEAVY_TAIL_REGRESSION = "heavy-tail-regression"


@dataclass(frozen=True)
class ClassificationCluster:
    """Contaminating cluster in feature space carrying one fixed label."""

    center: tuple
    variance: float
    label: float = 1.0

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError("variance must be positive")


@dataclass(frozen=True)
class ResponseOutlier:
    """Regression rows whose response is replaced by noise around ``mean``."""

    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError("variance must be positive")


@dataclass(frozen=True)
class PredictorOutlier:
    """Regression rows planted jointly at ``center`` in (z, y) space."""

    center: tuple
    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError("variance must be positive")


@dataclass(frozen=True)
class FixedPoint:
    """Rows repeated exactly at ``location`` with a fixed label."""

    location: tuple
    label: float


@dataclass(frozen=True)
class ContaminationSpec:
    """How many contaminated rows to append, and of which kind."""

    count: int = 0
    kind: object | None = None

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be nonnegative")
        if self.count > 0 and self.kind is None:
            raise ValueError("a contamination kind is required when count > 0")


CLEAN = ContaminationSpec(0, None)


@dataclass(frozen=True)
class GenConfig:
    """Generator settings: problem, clean sample count, contamination, seed.

    ``noise_sd`` only affects the two-moons problem (standard deviation of
    the isotropic jitter around the arcs).
    """

    problem: Problem
    n_clean: int
    contamination: ContaminationSpec = CLEAN
    seed: int = 0
    noise_sd: float = 0.2

    def __post_init__(self):
        if self.n_clean < 1:
            raise ValueError("n_clean must be at least 1")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")


def _require(config: GenConfig, problem: Problem, allowed_kinds: tuple) -> None:
    if config.problem is not problem:
        raise ValueError(f"config.problem is {config.problem}, expected {problem}")
    kind = config.contamination.kind
    if config.contamination.count > 0 and not isinstance(kind, allowed_kinds):
        names = ", ".join(t.__name__ for t in allowed_kinds)
        raise ValueError(f"{problem.value} supports contamination kinds: {names}")


def _assemble(clean_z, clean_y, out_z, out_y) -> Dataset:
    features = np.vstack([clean_z, out_z]) if len(out_y) else np.asarray(clean_z)
    targets = np.concatenate([clean_y, out_y])
    mask = np.zeros(targets.shape[0], dtype=bool)
    mask[len(clean_y):] = True
    return Dataset(features, targets, mask)


def gen_logistic_blobs(config: GenConfig) -> Dataset:
    """Two Gaussian class blobs plus an optional far-away contaminating cluster.

    Labels are +-1 with equal probability; class +1 points are centered at
    (-1, -1) and class -1 points at (1, 1), both with covariance 1.4 * I.
    Contaminated rows carry the cluster's fixed label.
    """
    _require(config, Problem.GAUSSIAN_BLOBS, (ClassificationCluster,))
    rng = np.random.default_rng(config.seed)
    n = config.n_clean
    y = rng.integers(0, 2, size=n) * 2.0 - 1.0
    centers = np.where(y[:, None] > 0, [-1.0, -1.0], [1.0, 1.0])
    z = centers + math.sqrt(1.4) * rng.standard_normal((n, 2))
    spec = config.contamination
    if spec.count:
        kind = spec.kind
        oz = np.asarray(kind.center, dtype=float) + math.sqrt(kind.variance) * rng.standard_normal((spec.count, 2))
        oy = np.full(spec.count, float(kind.label))
    else:
        oz, oy = np.empty((0, 2)), np.empty(0)
    return _assemble(z, y, oz, oy)


def gen_linear(config: GenConfig) -> Dataset:
    """Scalar linear regression Y = 10 Z + eps with optional outliers.

    Clean rows have Z uniform on [-3, 3] and standard normal noise.
    ``ResponseOutlier`` keeps the covariate law and replaces the response;
    ``PredictorOutlier`` plants (z, y) pairs jointly near its center.
    """
    _require(config, Problem.LINEAR_MODEL, (ResponseOutlier, PredictorOutlier))
    rng = np.random.default_rng(config.seed)
    n = config.n_clean
    z = rng.uniform(-3.0, 3.0, size=n)
    y = 10.0 * z + rng.standard_normal(n)
    spec = config.contamination
    if spec.count:
        kind = spec.kind
        if isinstance(kind, ResponseOutlier):
            oz = rng.uniform(-3.0, 3.0, size=spec.count)
            oy = kind.mean + math.sqrt(kind.variance) * rng.standard_normal(spec.count)
        else:
            sd = math.sqrt(kind.variance)
            oz = kind.center[0] + sd * rng.standard_normal(spec.count)
            oy = kind.center[1] + sd * rng.standard_normal(spec.count)
    else:
        oz, oy = np.empty(0), np.empty(0)
    return _assemble(z[:, None], y, oz[:, None], oy)


def gen_two_moons(config: GenConfig) -> Dataset:
    """Two interleaved half-circle classes with Gaussian jitter.

    The label -1 arc is the upper unit half circle (cos t, sin t) for t in
    [0, pi]; the label +1 arc is its point reflection (1 - cos t,
    0.5 - sin t), so the two moons interleave.  Clean labels are balanced
    to within one row.  Contamination is a ``FixedPoint``: rows repeated
    exactly at its location with its label, jitter-free.
    """
    _require(config, Problem.TWO_MOONS, (FixedPoint,))
    rng = np.random.default_rng(config.seed)
    n_up = (config.n_clean + 1) // 2
    n_lo = config.n_clean // 2
    t_up = rng.uniform(0.0, math.pi, size=n_up)
    t_lo = rng.uniform(0.0, math.pi, size=n_lo)
    upper = np.column_stack([np.cos(t_up), np.sin(t_up)])
    lower = np.column_stack([1.0 - np.cos(t_lo), 0.5 - np.sin(t_lo)])
    z = np.vstack([upper, lower])
    if config.noise_sd > 0:
        z = z + config.noise_sd * rng.standard_normal(z.shape)
    y = np.concatenate([np.full(n_up, -1.0), np.full(n_lo, 1.0)])
    spec = config.contamination
    if spec.count:
        oz = np.tile(np.asarray(spec.kind.location, dtype=float), (spec.count, 1))
        oy = np.full(spec.count, float(spec.kind.label))
    else:
        oz, oy = np.empty((0, 2)), np.empty(0)
    return _assemble(z, y, oz, oy)


def gen_heavy_tail(config: GenConfig) -> Dataset:
    """Linear regression with unit-variance Student-t(5) noise, no outliers.

    Y = 10 Z + eta where eta is t(5) rescaled by sqrt(3/5) to unit
    variance.  The returned dataset has no contamination mask.
    """
    if config.problem is not Problem.HEAVY_TAIL_REGRESSION:
        raise ValueError(
            f"config.problem is {config.problem}, expected {Problem.HEAVY_TAIL_REGRESSION}"
        )
    if config.contamination.count:
        raise ValueError("the heavy-tail problem does not support contamination")
    rng = np.random.default_rng(config.seed)
    n = config.n_clean
    z = rng.uniform(-3.0, 3.0, size=n)
    eta = rng.standard_t(5, size=n) * math.sqrt(3.0 / 5.0)
    return Dataset(z[:, None], 10.0 * z + eta, None)


_GENERATORS = {
    Problem.GAUSSIAN_BLOBS: gen_logistic_blobs,
    Problem.LINEAR_MODEL: gen_linear,
    Problem.TWO_MOONS: gen_two_moons,
    Problem.HEAVY_TAIL_REGRESSION: gen_heavy_tail,
}


def generate(config: GenConfig) -> Dataset:
    """Dispatch to the generator matching ``config.problem``."""
    return _GENERATORS[config.problem](config)


def with_intercept(data: Dataset) -> Dataset:
    """Copy of ``data`` with a constant 1.0 feature column appended."""
    ones = np.ones((data.n_samples, 1))
    return Dataset(np.hstack([data.features, ones]), data.targets, data.outlier_mask)


def dataset_to_csv(data: Dataset, path) -> None:
    """Write ``data`` in the z1..zd,y,is_outlier exchange format."""
    d = data.n_features
    mask = data.outlier_mask
    if mask is None:
        mask = np.zeros(data.n_samples, dtype=bool)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"z{i + 1}" for i in range(d)] + ["y", "is_outlier"])
        for row, target, flag in zip(data.features, data.targets, mask):
            writer.writerow([f"{v:.17g}" for v in row] + [f"{target:.17g}", int(flag)])


def dataset_from_csv(path) -> Dataset:
    """Read a dataset written by :func:`dataset_to_csv`."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"dataset file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-2:] != ["y", "is_outlier"]:
            raise ValueError(f"{path}: expected header z1,...,zd,y,is_outlier")
        d = len(header) - 2
        if [f"z{i + 1}" for i in range(d)] != header[:d]:
            raise ValueError(f"{path}: expected header z1,...,zd,y,is_outlier")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    features = np.array([[float(v) for v in row[:d]] for row in rows])
    targets = np.array([float(row[d]) for row in rows])
    mask = np.array([bool(int(row[d + 1])) for row in rows])
    return Dataset(features, targets, mask)
