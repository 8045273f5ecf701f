import numpy as np
import pytest

from robusterm import (
    Dataset,
    Loss,
    Model,
    accuracy,
    monte_carlo,
    mse,
    robust_cv_median,
)


def test_mse_perfect_fit_is_zero():
    z = np.arange(10.0)[:, None]
    data = Dataset(z, 3.0 * z[:, 0])
    assert mse(Model(np.array([3.0]), Loss.QUADRATIC), data) == 0.0


def test_mse_matches_explicit_loop():
    rng = np.random.default_rng(0)
    z = rng.standard_normal((25, 3))
    y = rng.standard_normal(25)
    beta = rng.standard_normal(3)
    data = Dataset(z, y)
    total = 0.0
    for i in range(25):
        total += (z[i] @ beta - y[i]) ** 2
    assert mse(Model(beta, Loss.QUADRATIC), data) == pytest.approx(total / 25, rel=1e-12)


def test_accuracy_perfect_separator():
    z = np.array([[-2.0, 0.0], [-1.0, 1.0], [2.0, 0.5], [3.0, -1.0]])
    y = np.array([1.0, 1.0, -1.0, -1.0])
    data = Dataset(z, y)
    assert accuracy(Model(np.array([-1.0, 0.0]), Loss.LOGISTIC), data) == 1.0


def test_accuracy_flipping_labels_complements():
    rng = np.random.default_rng(1)
    z = rng.standard_normal((40, 2))
    y = rng.choice([-1.0, 1.0], size=40)
    beta = np.array([0.7, -0.3])
    acc = accuracy(Model(beta, Loss.LOGISTIC), Dataset(z, y))
    flipped = accuracy(Model(beta, Loss.LOGISTIC), Dataset(z, -y))
    assert acc + flipped == pytest.approx(1.0)


def test_accuracy_zero_margin_counts_as_positive():
    data = Dataset(np.zeros((2, 1)), np.array([1.0, -1.0]))
    assert accuracy(Model(np.array([5.0]), Loss.LOGISTIC), data) == 0.5


def test_accuracy_random_predictor_near_half():
    rng = np.random.default_rng(2)
    z = rng.standard_normal((10_000, 2))
    y = np.tile([1.0, -1.0], 5_000)
    acc = accuracy(Model(rng.standard_normal(2), Loss.LOGISTIC), Dataset(z, y))
    assert acc == pytest.approx(0.5, abs=0.02)


def test_accuracy_requires_pm_one():
    data = Dataset(np.ones((2, 1)), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        accuracy(Model(np.ones(1), Loss.LOGISTIC), data)


# --------------------------------------------------------- cross-validation


def constant_model(train):
    return Model(np.zeros(train.n_features), Loss.QUADRATIC)


def fold_target(model, fold):
    # score a fold by its (single) target so median aggregation is exact
    return float(np.median(fold.targets))


def test_cv_median_ignores_outlier_fold():
    data = Dataset(np.ones((3, 1)), np.array([1.0, 2.0, 100.0]))
    rep = robust_cv_median(data, 3, constant_model, seed=0, score=fold_target)
    assert sorted(rep.fold_scores.tolist()) == [1.0, 2.0, 100.0]
    assert rep.median_score == 2.0


def test_cv_two_folds_median_is_midpoint():
    data = Dataset(np.ones((4, 1)), np.array([1.0, 1.0, 5.0, 5.0]))

    def by_sum(model, fold):
        return float(fold.targets.sum())

    rep = robust_cv_median(data, 2, constant_model, seed=3, score=by_sum)
    assert rep.fold_scores.shape == (2,)
    assert rep.median_score == pytest.approx(float(np.mean(rep.fold_scores)))


def test_cv_fold_sizes_differ_by_at_most_one():
    data = Dataset(np.ones((10, 1)), np.arange(10.0))
    rep = robust_cv_median(data, 4, constant_model, seed=1, score=fold_target)
    sizes = sorted(len(f) for f in rep.fold_assignment)
    assert sizes == [2, 2, 3, 3]
    all_idx = np.concatenate(rep.fold_assignment)
    assert sorted(all_idx.tolist()) == list(range(10))


def test_cv_leave_one_out_allowed():
    data = Dataset(np.ones((6, 1)), np.arange(6.0))
    rep = robust_cv_median(data, 6, constant_model, seed=2, score=fold_target)
    assert rep.fold_scores.shape == (6,)
    assert sorted(rep.fold_scores.tolist()) == list(range(6))


def test_cv_fold_assignment_deterministic():
    data = Dataset(np.ones((12, 1)), np.arange(12.0))
    a = robust_cv_median(data, 5, constant_model, seed=9, score=fold_target)
    b = robust_cv_median(data, 5, constant_model, seed=9, score=fold_target)
    for fa, fb in zip(a.fold_assignment, b.fold_assignment):
        np.testing.assert_array_equal(fa, fb)


def test_cv_validates_m():
    data = Dataset(np.ones((5, 1)), np.arange(5.0))
    with pytest.raises(ValueError):
        robust_cv_median(data, 1, constant_model)
    with pytest.raises(ValueError):
        robust_cv_median(data, 6, constant_model)


def test_cv_trainer_sees_complement():
    data = Dataset(np.ones((6, 1)), np.arange(6.0))
    seen = []

    def spy(train):
        seen.append(sorted(train.targets.tolist()))
        return constant_model(train)

    robust_cv_median(data, 3, spy, seed=4, score=fold_target)
    assert all(len(s) == 4 for s in seen)


# ------------------------------------------------------------- monte carlo


def test_monte_carlo_constant_experiment():
    out = monte_carlo(10, lambda seed: 2.5, base_seed=0)
    assert out.std == 0.0
    assert out.mean == 2.5
    assert out.median == 2.5


def test_monte_carlo_single_run():
    out = monte_carlo(1, lambda seed: float(seed) + 0.5, base_seed=7)
    np.testing.assert_array_equal(out.values, [7.5])
    assert out.mean == 7.5
    assert out.std == 0.0


def test_monte_carlo_seed_layout_and_reproducibility():
    out = monte_carlo(5, lambda seed: float(seed), base_seed=100)
    np.testing.assert_array_equal(out.values, [100, 101, 102, 103, 104])
    again = monte_carlo(5, lambda seed: float(seed), base_seed=100)
    assert out.values.tobytes() == again.values.tobytes()


def test_monte_carlo_parallel_equals_serial():
    def experiment(seed):
        rng = np.random.default_rng(seed)
        return float(rng.standard_normal(100).mean())

    serial = monte_carlo(16, experiment, base_seed=0, n_jobs=1)
    parallel = monte_carlo(16, experiment, base_seed=0, n_jobs=4)
    assert serial.values.tobytes() == parallel.values.tobytes()
    assert serial.median == parallel.median
    assert serial.std == parallel.std


def test_monte_carlo_wraps_failures_with_context():
    def boom(seed):
        if seed == 3:
            raise ValueError("bad draw")
        return 1.0

    with pytest.raises(RuntimeError, match=r"run 3 \(seed 3\)"):
        monte_carlo(5, boom, base_seed=0)


def test_monte_carlo_validates_arguments():
    with pytest.raises(ValueError):
        monte_carlo(0, lambda seed: 1.0)
    with pytest.raises(ValueError):
        monte_carlo(2, lambda seed: 1.0, n_jobs=0)
