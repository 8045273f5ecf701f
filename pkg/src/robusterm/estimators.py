"""Scikit-learn style estimators wrapping the descent fitters.

These are thin facades: ``fit`` validates the inputs, optionally appends an
intercept column, builds an :class:`~robusterm.descent.OptimConfig` and
dispatches to one of the functional fitters.  The full
:class:`~robusterm.descent.FitReport` is kept on the fitted estimator as
``report_``.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .descent import (
    FixedDelta,
    MadBurnIn,
    OptimConfig,
    fit_fixed_blocks,
    fit_median_block,
    fit_resampled_blocks,
)
from .losses import Dataset, Loss

_SOLVERS = {
    "fixed": fit_fixed_blocks,
    "resampled": fit_resampled_blocks,
    "median-block": fit_median_block,
}


class _BaseRobustLinear(BaseEstimator):
    """Shared plumbing of the regressor and classifier facades.

    Parameters
    ----------
    k : int or None
        Number of blocks.  ``None`` picks ``max(1, isqrt(n_samples))``,
        a heuristic that keeps both the block size and the block count
        growing with the sample size.
    delta : float or "mad"
        Fixed truncation scale, or "mad" to recalibrate it from the
        block-mean spread during ``burn_in`` early iterations (starting
        from ``delta0``).
    solver : {"fixed", "resampled", "median-block"}
        Fixed-partition descent, permutation-resampled descent, or the
        median-block baseline.
    step_size : float or None
        Gradient step size; ``None`` selects a per-loss default (0.05 for
        squared error, 1.0 for logistic).
    """

    _loss: Loss

    def __init__(
        self,
        k=None,
        delta="mad",
        delta0=0.1,
        burn_in=10,
        step_size=None,
        max_iter=300,
        solver="resampled",
        tol=None,
        fit_intercept=True,
        inner_iters=25,
        random_state=0,
    ):
        self.k = k
        self.delta = delta
        self.delta0 = delta0
        self.burn_in = burn_in
        self.step_size = step_size
        self.max_iter = max_iter
        self.solver = solver
        self.tol = tol
        self.fit_intercept = fit_intercept
        self.inner_iters = inner_iters
        self.random_state = random_state

    def _optim_config(self, n_samples: int) -> OptimConfig:
        if self.solver not in _SOLVERS:
            raise ValueError(
                f"solver must be one of {sorted(_SOLVERS)}, got {self.solver!r}"
            )
        if self.delta == "mad":
            mode = MadBurnIn(self.burn_in, self.delta0)
        else:
            mode = FixedDelta(float(self.delta))
        k = self.k if self.k is not None else max(1, math.isqrt(n_samples))
        step = self.step_size
        if step is None:
            step = 1.0 if self._loss is Loss.LOGISTIC else 0.05
        return OptimConfig(
            k=int(k),
            step_size=float(step),
            max_iter=int(self.max_iter),
            delta_mode=mode,
            loss=self._loss,
            seed=int(self.random_state),
            tol=self.tol,
            inner_iters=int(self.inner_iters),
        )

    def _fit_coef(self, X, y):
        features = np.hstack([X, np.ones((X.shape[0], 1))]) if self.fit_intercept else X
        data = Dataset(features, y)
        config = self._optim_config(X.shape[0])
        report = _SOLVERS[self.solver](data, config)
        self.report_ = report
        if self.fit_intercept:
            self.coef_ = report.coef[:-1]
            self.intercept_ = float(report.coef[-1])
        else:
            self.coef_ = report.coef
            self.intercept_ = 0.0
        self.n_features_in_ = X.shape[1]
        return self

    def _decision(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return X @ self.coef_ + self.intercept_


class RobustBlockRegressor(_BaseRobustLinear, RegressorMixin):
    """Linear regressor minimizing a blockwise robust squared-error risk."""

    _loss = Loss.QUADRATIC

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        return self._fit_coef(X, y.astype(float))

    def predict(self, X):
        return self._decision(X)


class RobustBlockClassifier(_BaseRobustLinear, ClassifierMixin):
    """Linear classifier minimizing a blockwise robust logistic risk."""

    _loss = Loss.LOGISTIC

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] != 2:
            raise ValueError(
                f"expected exactly 2 classes, got {self.classes_.shape[0]}"
            )
        signs = np.where(y == self.classes_[1], 1.0, -1.0)
        return self._fit_coef(X, signs)

    def decision_function(self, X):
        return self._decision(X)

    def predict(self, X):
        # Zero margins resolve to the positive class, matching the sign
        # convention of evaluation.accuracy.
        return self.classes_[(self._decision(X) >= 0.0).astype(int)]
