"""Non-robust reference fits used in comparisons."""

from __future__ import annotations

import numpy as np
from sklearn.linear_model import LogisticRegression

from .losses import Dataset, Loss, Model, _pm_one_targets


def fit_ols(data: Dataset) -> Model:
    """Ordinary least squares on the dataset's features as given.

    No intercept is added here; augment the features beforehand if one is
    wanted.
    """
    coef, *_ = np.linalg.lstsq(data.features, data.targets, rcond=None)
    return Model(coef, Loss.QUADRATIC)


def fit_plain_logistic(data: Dataset, max_iter: int = 1000) -> Model:
    """Standard (non-robust) logistic regression on the features as given.

    Targets must be +-1.  The features are used verbatim, so an intercept
    column must already be present if one is wanted; the underlying solver
    is told not to add its own.
    """
    y = _pm_one_targets(data)
    clf = LogisticRegression(fit_intercept=False, max_iter=max_iter)
    clf.fit(data.features, y)
    # scikit-learn orients coefficients toward classes_[1], which is +1 for
    # +-1 labels, matching our sign convention.
    return Model(clf.coef_.ravel(), Loss.LOGISTIC)
