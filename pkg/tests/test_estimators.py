import numpy as np
import pytest
from sklearn.base import clone

from robusterm import (
    GenConfig,
    Problem,
    RobustBlockClassifier,
    RobustBlockRegressor,
    gen_linear,
    gen_logistic_blobs,
)


def linear_xy(seed=0, n=400):
    data = gen_linear(GenConfig(Problem.LINEAR_MODEL, n, seed=seed))
    return data.features, data.targets


def test_get_set_params_round_trip():
    est = RobustBlockRegressor(k=20, delta=1.5, max_iter=50)
    params = est.get_params()
    assert params["k"] == 20
    assert params["delta"] == 1.5
    est.set_params(max_iter=80)
    assert est.max_iter == 80


def test_clone_preserves_configuration():
    est = RobustBlockClassifier(k=13, delta="mad", burn_in=4, random_state=3)
    other = clone(est)
    assert other.get_params() == est.get_params()


def test_regressor_recovers_slope():
    X, y = linear_xy()
    est = RobustBlockRegressor(k=20, max_iter=200, delta0=100.0, random_state=0)
    est.fit(X, y)
    assert est.coef_.shape == (1,)
    assert est.coef_[0] == pytest.approx(10.0, abs=0.3)
    assert abs(est.intercept_) < 0.5
    pred = est.predict(X)
    assert pred.shape == y.shape
    assert est.score(X, y) > 0.9


def test_regressor_without_intercept():
    X, y = linear_xy(seed=1)
    est = RobustBlockRegressor(k=20, max_iter=200, delta0=100.0,
                               fit_intercept=False, random_state=0)
    est.fit(X, y)
    assert est.intercept_ == 0.0
    assert est.coef_[0] == pytest.approx(10.0, abs=0.3)


def test_classifier_on_clean_blobs():
    data = gen_logistic_blobs(GenConfig(Problem.GAUSSIAN_BLOBS, 600, seed=4))
    X, y = data.features, data.targets
    est = RobustBlockClassifier(k=25, max_iter=150, random_state=0)
    est.fit(X, y)
    assert set(est.classes_.tolist()) == {-1.0, 1.0}
    pred = est.predict(X)
    assert set(np.unique(pred)).issubset({-1.0, 1.0})
    assert est.score(X, y) >= 0.8


def test_predict_before_fit_raises():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        RobustBlockRegressor().predict(np.ones((2, 1)))


def test_unknown_solver_rejected():
    X, y = linear_xy(seed=5, n=100)
    with pytest.raises(ValueError):
        RobustBlockRegressor(solver="newton", k=5, max_iter=5).fit(X, y)


def test_feature_count_checked_at_predict():
    X, y = linear_xy(seed=6, n=100)
    est = RobustBlockRegressor(k=5, max_iter=20, delta0=100.0).fit(X, y)
    with pytest.raises(ValueError):
        est.predict(np.ones((3, 2)))


def test_fixed_delta_solver_variants():
    X, y = linear_xy(seed=7, n=200)
    for solver in ("fixed", "resampled", "median-block"):
        est = RobustBlockRegressor(k=10, delta=1e4, solver=solver,
                                   max_iter=60, random_state=1)
        est.fit(X, y)
        assert est.coef_[0] == pytest.approx(10.0, abs=0.5)
