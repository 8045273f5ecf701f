"""Linear models, datasets and per-sample losses.

A model is a coefficient vector plus a loss kind; predictions are plain
inner products.  An intercept, where wanted, is handled upstream by
appending a constant feature column (see ``datagen.with_intercept``), never
inside the model itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit


class Loss(Enum):
    """Supported per-sample losses for linear predictors."""

    LOGISTIC = "logistic"
    QUADRATIC = "quadratic"


@dataclass(frozen=True, eq=False)
class Model:
    """Linear predictor ``x -> <coef, x>`` scored by ``loss``."""

    coef: np.ndarray
    loss: Loss

    def __post_init__(self):
        coef = np.asarray(self.coef, dtype=float)
        if coef.ndim != 1 or coef.size == 0:
            raise ValueError("coef must be a nonempty one-dimensional array")
        if not np.isfinite(coef).all():
            raise ValueError("coef must be finite")
        object.__setattr__(self, "coef", coef)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix, targets and optional contamination bookkeeping.

    ``outlier_mask`` marks rows that a generator planted as contamination.
    It is metadata only: estimators never look at it.
    """

    features: np.ndarray
    targets: np.ndarray
    outlier_mask: np.ndarray | None = None

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        if features.ndim != 2:
            raise ValueError("features must be a 2-d array")
        if targets.ndim != 1 or targets.shape[0] != features.shape[0]:
            raise ValueError("targets must be 1-d with one entry per row of features")
        if features.shape[0] == 0:
            raise ValueError("dataset must contain at least one sample")
        mask = self.outlier_mask
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != targets.shape:
                raise ValueError("outlier_mask must match the number of samples")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "outlier_mask", mask)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        """Row subset as a new dataset (mask carried along when present)."""
        idx = np.asarray(idx)
        mask = None if self.outlier_mask is None else self.outlier_mask[idx]
        return Dataset(self.features[idx], self.targets[idx], mask)


def _predictions(model: Model, data: Dataset) -> np.ndarray:
    if model.coef.shape[0] != data.n_features:
        raise ValueError(
            f"model has {model.coef.shape[0]} coefficients but data has "
            f"{data.n_features} features"
        )
    return data.features @ model.coef


def _pm_one_targets(data: Dataset) -> np.ndarray:
    y = data.targets
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("logistic loss requires targets in {-1, +1}")
    return y


def per_sample_loss(model: Model, data: Dataset) -> np.ndarray:
    """Loss of each sample under ``model``, shape (n_samples,).

    The logistic branch evaluates log(1 + exp(-y * f)) through
    ``logaddexp`` so large margins neither overflow nor lose the tiny
    positive tail.
    """
    f = _predictions(model, data)
    if model.loss is Loss.LOGISTIC:
        y = _pm_one_targets(data)
        return np.logaddexp(0.0, -y * f)
    r = f - data.targets
    return r * r


def per_sample_loss_grad(model: Model, data: Dataset) -> np.ndarray:
    """Gradient of each sample's loss with respect to ``coef``, shape (N, d)."""
    f = _predictions(model, data)
    if model.loss is Loss.LOGISTIC:
        y = _pm_one_targets(data)
        slope = -y * expit(-y * f)
    else:
        slope = 2.0 * (f - data.targets)
    return data.features * slope[:, None]
