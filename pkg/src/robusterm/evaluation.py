"""Metrics, robust cross-validation and the Monte Carlo harness."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .losses import Dataset, Model, _pm_one_targets, _predictions


def mse(model: Model, data: Dataset) -> float:
    """Mean squared prediction error of ``model`` on ``data``."""
    r = _predictions(model, data) - data.targets
    return float(np.mean(r * r))


def accuracy(model: Model, data: Dataset) -> float:
    """Fraction of rows where sign(<coef, z>) matches the +-1 target.

    A zero margin counts as +1.
    """
    y = _pm_one_targets(data)
    pred = np.where(_predictions(model, data) >= 0.0, 1.0, -1.0)
    return float(np.mean(pred == y))


@dataclass(eq=False)
class CVReport:
    """Fold scores of a robust cross-validation run."""

    fold_scores: np.ndarray
    median_score: float
    fold_assignment: list
    seed: int


def robust_cv_median(
    data: Dataset,
    m: int,
    trainer,
    seed: int = 0,
    score=mse,
) -> CVReport:
    """Median of m-fold cross-validation scores.

    Rows are shuffled by ``seed`` and split into ``m`` folds whose sizes
    differ by at most one.  For each fold, ``trainer`` fits a model on the
    complement and ``score(model, fold)`` is recorded; the summary is the
    median of the fold scores, which ignores the minority of folds that
    contamination can corrupt.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    if m > data.n_samples:
        raise ValueError(
            f"m={m} folds cannot be formed from {data.n_samples} samples"
        )
    order = np.random.default_rng(seed).permutation(data.n_samples)
    folds = np.array_split(order, m)
    scores = np.empty(m)
    for j, fold in enumerate(folds):
        train_idx = np.concatenate([f for i, f in enumerate(folds) if i != j])
        model = trainer(data.subset(train_idx))
        scores[j] = score(model, data.subset(fold))
    return CVReport(scores, float(np.median(scores)), folds, seed)


@dataclass(eq=False)
class MonteCarloSummary:
    """Per-run metrics of a seeded Monte Carlo experiment plus summaries.

    ``std`` is the population standard deviation (ddof=0), so a single run
    reports 0.0.
    """

    values: np.ndarray
    median: float
    mean: float
    std: float
    digest: str = ""


def monte_carlo(
    runs: int,
    experiment,
    base_seed: int = 0,
    n_jobs: int = 1,
    digest: str = "",
) -> MonteCarloSummary:
    """Run ``experiment(seed)`` for seeds base_seed..base_seed+runs-1.

    Run i always receives seed ``base_seed + i`` regardless of scheduling,
    and results are collected in run order, so parallel execution returns
    exactly the serial result.  A failing run aborts the whole experiment
    with the run index and seed attached.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    if n_jobs < 1:
        raise ValueError("n_jobs must be at least 1")
    seeds = [base_seed + i for i in range(runs)]

    def run_one(i: int) -> float:
        try:
            return float(experiment(seeds[i]))
        except Exception as exc:
            raise RuntimeError(
                f"monte carlo run {i} (seed {seeds[i]}) failed: {exc}"
            ) from exc

    if n_jobs == 1:
        values = np.array([run_one(i) for i in range(runs)])
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            values = np.array(list(pool.map(run_one, range(runs))))
    return MonteCarloSummary(
        values,
        float(np.median(values)),
        float(np.mean(values)),
        float(np.std(values)),
        digest,
    )
