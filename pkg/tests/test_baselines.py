import numpy as np
import pytest

from robusterm import (
    Dataset,
    GenConfig,
    Problem,
    accuracy,
    fit_ols,
    fit_plain_logistic,
    gen_linear,
    gen_logistic_blobs,
)


def test_ols_matches_normal_equations():
    rng = np.random.default_rng(0)
    z = rng.standard_normal((50, 3))
    y = rng.standard_normal(50)
    model = fit_ols(Dataset(z, y))
    expected = np.linalg.solve(z.T @ z, z.T @ y)
    np.testing.assert_allclose(model.coef, expected, rtol=1e-10)


def test_ols_recovers_clean_slope():
    data = gen_linear(GenConfig(Problem.LINEAR_MODEL, 5000, seed=1))
    model = fit_ols(data)
    assert model.coef[0] == pytest.approx(10.0, abs=0.1)


def test_plain_logistic_separates_clean_blobs():
    data = gen_logistic_blobs(GenConfig(Problem.GAUSSIAN_BLOBS, 600, seed=2))
    model = fit_plain_logistic(data)
    assert accuracy(model, data) >= 0.8


def test_plain_logistic_requires_pm_one_targets():
    data = Dataset(np.ones((4, 1)), np.array([0.0, 1.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        fit_plain_logistic(data)
