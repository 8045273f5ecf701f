"""Gradient descent on blockwise robust risk estimates.

All fitters share the same step shape: evaluate per-sample losses at the
current coefficients, form block means, locate the robust risk estimate,
then average the per-sample loss gradients over the blocks whose mean lies
inside the quadratic window of the score (the "active" blocks) and move
against that average.  They differ in where the blocks come from:

* :func:`fit_fixed_blocks` commits to one random partition for the whole run;
* :func:`fit_resampled_blocks` redraws a uniform permutation every step and
  tracks the permutation-averaged risk with a short inner stochastic run;
* :func:`fit_median_block` is the median-of-means baseline, stepping with
  the gradient of the single block whose loss mean is the (lower) median;
* :func:`fit_two_stage` refines a first fit on held-out data by descending
  a robust estimate of per-sample loss differences under an excess-risk
  guard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .losses import Dataset, Loss, Model, per_sample_loss, per_sample_loss_grad
from .robust_mean import (
    HUBER,
    BlockPartition,
    RobustMeanConfig,
    RobustMeanResult,
    _mw_root,
    _blocks_from_order,
    _sgd_descend,
    mad_delta,
    make_partition,
    robust_mean_fixed,
)

#: Column order of ``FitReport.trajectory``.
TRAJECTORY_COLUMNS = ("loss_estimate", "grad_norm", "delta", "active_blocks")


class DegenerateGradientError(RuntimeError):
    """No block mean fell inside the truncation window around the risk estimate.

    This signals that ``delta`` is too small for the spread of block means
    at the current iterate.
    """

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


@dataclass(frozen=True)
class FixedDelta:
    """Use one constant truncation scale for the whole run."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")


@dataclass(frozen=True)
class MadBurnIn:
    """Recalibrate delta from the block-mean spread during early iterations.

    Iteration 0 runs with ``delta0``; each of the first ``burn_in``
    iterations then re-estimates delta with :func:`mad_delta` from the
    block means it just computed, and the value reached at the end of the
    burn-in stays frozen for the rest of the run.
    """

    burn_in: int = 10
    delta0: float = 0.1

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")


@dataclass(frozen=True, eq=False)
class OptimConfig:
    """Settings shared by the descent fitters.

    ``k`` is the requested number of blocks; fitters that resample
    permutations derive the block size as ``n = N // k`` and then use the
    full ``floor(N / n)`` blocks each draw.  ``coef0`` defaults to zeros.
    ``tol``, when set, stops a run early once an accepted step moves the
    coefficients by less than ``tol`` in Euclidean norm.
    """

    k: int
    step_size: float
    max_iter: int
    delta_mode: FixedDelta | MadBurnIn
    loss: Loss = Loss.QUADRATIC
    seed: int = 0
    coef0: np.ndarray | None = None
    tol: float | None = None
    inner_iters: int = 25
    mw_tol: float = 1e-10
    mw_max_iter: int = 500
    residual_tol: float = 1e-8
    retry_limit: int = 100

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        if not isinstance(self.delta_mode, (FixedDelta, MadBurnIn)):
            raise ValueError("delta_mode must be FixedDelta or MadBurnIn")
        if self.inner_iters < 1:
            raise ValueError("inner_iters must be at least 1")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive when given")
        if self.coef0 is not None:
            coef0 = np.asarray(self.coef0, dtype=float)
            if coef0.ndim != 1 or not np.isfinite(coef0).all():
                raise ValueError("coef0 must be a finite one-dimensional array")
            object.__setattr__(self, "coef0", coef0)


@dataclass(eq=False)
class FitReport:
    """Result of a descent run.

    ``trajectory`` has one row per performed iteration with columns
    ``TRAJECTORY_COLUMNS``: the robust loss estimate, the Euclidean norm of
    the step direction, the delta in force, and the number of active
    blocks.  ``skipped`` counts resampled (or, for the two-stage fitter,
    rejected) iterations.
    """

    coef: np.ndarray
    trajectory: np.ndarray
    delta_final: float
    iterations: int
    skipped: int = 0


def robust_loss_at(
    model: Model, data: Dataset, partition: BlockPartition, config: RobustMeanConfig
) -> RobustMeanResult:
    """Robust estimate of the expected loss of ``model`` over ``partition``."""
    return robust_mean_fixed(per_sample_loss(model, data), partition, config)


def robust_gradient(
    model: Model, data: Dataset, partition: BlockPartition, config: RobustMeanConfig
) -> np.ndarray:
    """Gradient of the robust risk estimate with respect to the coefficients.

    Averages the blockwise mean loss gradients over the active blocks
    (those whose loss mean lies within ``delta / sqrt(n)`` of the robust
    estimate).  Raises :class:`DegenerateGradientError` when no block is
    active, which indicates ``delta`` is too small.
    """
    result = robust_loss_at(model, data, partition, config)
    if not result.active.any():
        raise DegenerateGradientError(
            "no active block: every block mean is outside the truncation "
            "window; increase delta"
        )
    grads = per_sample_loss_grad(model, data)
    gbm = grads[partition.indices].mean(axis=1)
    return gbm[result.active].mean(axis=0)


def _init_coef(config: OptimConfig, data: Dataset) -> np.ndarray:
    if config.coef0 is not None:
        if config.coef0.shape[0] != data.n_features:
            raise ValueError(
                f"coef0 has {config.coef0.shape[0]} entries but data has "
                f"{data.n_features} features"
            )
        return config.coef0.copy()
    return np.zeros(data.n_features)


def _initial_delta(mode) -> float:
    return mode.delta if isinstance(mode, FixedDelta) else mode.delta0


def _next_delta(bm: np.ndarray, current: float) -> float:
    # Zero spread (all block means equal, as at a symmetric start for the
    # logistic loss) carries no scale information; keep the current value
    # rather than collapse to mad_delta's degenerate floor.
    if float(np.median(np.abs(bm - np.median(bm)))) == 0.0:
        return current
    return mad_delta(bm)


def _check_losses(losses: np.ndarray, iteration: int) -> None:
    if not np.isfinite(losses).all():
        raise ValueError(
            f"non-finite losses at iteration {iteration}; "
            "the step size is likely too large"
        )


def fit_fixed_blocks(data: Dataset, config: OptimConfig) -> FitReport:
    """Descend the robust risk over one fixed random partition.

    The partition is drawn once from ``config.seed`` and reused for every
    iteration, so the objective is a deterministic function of the
    coefficients.  Raises :class:`DegenerateGradientError` if some
    iteration leaves no block active.
    """
    coef = _init_coef(config, data)
    rng = np.random.default_rng(config.seed)
    partition = make_partition(
        data.n_samples, config.k, seed=int(rng.integers(0, 2 ** 63 - 1)), shuffle=True
    )
    n = partition.n
    root_of = math.sqrt(n)
    delta = _initial_delta(config.delta_mode)
    mad_mode = isinstance(config.delta_mode, MadBurnIn)
    trajectory = np.empty((config.max_iter, 4))
    done = 0
    for t in range(config.max_iter):
        model = Model(coef, config.loss)
        losses = per_sample_loss(model, data)
        _check_losses(losses, t)
        bm = losses[partition.indices].mean(axis=1)
        estimate, _, _ = _mw_root(
            bm, n, delta, HUBER, config.mw_tol, config.mw_max_iter, config.residual_tol
        )
        active = np.abs(bm - estimate) <= delta / root_of
        if not active.any():
            raise DegenerateGradientError(
                f"no active block at iteration {t}; increase delta", iteration=t
            )
        grads = per_sample_loss_grad(model, data)
        direction = grads[partition.indices].mean(axis=1)[active].mean(axis=0)
        trajectory[t] = (estimate, float(np.linalg.norm(direction)), delta, active.sum())
        if mad_mode and t < config.delta_mode.burn_in:
            delta = _next_delta(bm, delta)
        coef = coef - config.step_size * direction
        done = t + 1
        if config.tol is not None and config.step_size * float(np.linalg.norm(direction)) <= config.tol:
            break
    return FitReport(coef, trajectory[:done], delta, done)


def fit_resampled_blocks(data: Dataset, config: OptimConfig) -> FitReport:
    """Descend the permutation-averaged robust risk.

    Every iteration re-estimates the permutation-averaged risk with a short
    inner stochastic run (``config.inner_iters`` steps, fresh permutations,
    started at the median of the current block means), then draws a fresh
    uniform permutation for the gradient blocks.  Gradient permutations
    that leave no block active are skipped and resampled against the same
    risk estimate; the count lands in ``FitReport.skipped``.
    """
    coef = _init_coef(config, data)
    n_samples = data.n_samples
    rng = np.random.default_rng(config.seed)
    n = n_samples // config.k
    if n < 1:
        raise ValueError(f"k={config.k} exceeds the number of samples {n_samples}")
    n_blocks = n_samples // n
    root_of = math.sqrt(n)
    delta = _initial_delta(config.delta_mode)
    mad_mode = isinstance(config.delta_mode, MadBurnIn)
    trajectory = np.empty((config.max_iter, 4))
    skipped = 0
    done = 0
    for t in range(config.max_iter):
        model = Model(coef, config.loss)
        losses = per_sample_loss(model, data)
        _check_losses(losses, t)
        inner_step = delta ** 2 / (n * n_blocks)
        first = _blocks_from_order(losses, rng.permutation(n_samples), n, n_blocks)
        z, _ = _sgd_descend(
            losses, n, n_blocks, delta, inner_step,
            config.inner_iters, rng, float(np.median(first)), HUBER,
        )
        attempts = 0
        while True:
            order = rng.permutation(n_samples)
            bm = _blocks_from_order(losses, order, n, n_blocks)
            active = np.abs(bm - z) <= delta / root_of
            if active.any():
                break
            skipped += 1
            attempts += 1
            if attempts >= config.retry_limit:
                raise DegenerateGradientError(
                    f"no active block after {attempts} resampled permutations "
                    f"at iteration {t}; increase delta",
                    iteration=t,
                )
        grads = per_sample_loss_grad(model, data)
        idx = order[: n * n_blocks].reshape(n_blocks, n)
        direction = grads[idx].mean(axis=1)[active].mean(axis=0)
        trajectory[t] = (z, float(np.linalg.norm(direction)), delta, active.sum())
        if mad_mode and t < config.delta_mode.burn_in:
            delta = _next_delta(bm, delta)
        coef = coef - config.step_size * direction
        done = t + 1
        if config.tol is not None and config.step_size * float(np.linalg.norm(direction)) <= config.tol:
            break
    return FitReport(coef, trajectory[:done], delta, done, skipped)


def fit_median_block(data: Dataset, config: OptimConfig) -> FitReport:
    """Median-of-means baseline: step with the median block's gradient.

    Each iteration draws a fresh permutation, ranks the block loss means
    and descends the mean gradient of the block at the lower median.  No
    truncation scale is involved, so ``config.delta_mode`` is ignored and
    ``delta_final`` is NaN.
    """
    coef = _init_coef(config, data)
    n_samples = data.n_samples
    rng = np.random.default_rng(config.seed)
    n = n_samples // config.k
    if n < 1:
        raise ValueError(f"k={config.k} exceeds the number of samples {n_samples}")
    n_blocks = n_samples // n
    median_rank = (n_blocks - 1) // 2
    trajectory = np.empty((config.max_iter, 4))
    done = 0
    for t in range(config.max_iter):
        model = Model(coef, config.loss)
        losses = per_sample_loss(model, data)
        _check_losses(losses, t)
        order = rng.permutation(n_samples)
        idx = order[: n * n_blocks].reshape(n_blocks, n)
        bm = losses[idx].mean(axis=1)
        j = int(np.argsort(bm, kind="stable")[median_rank])
        grads = per_sample_loss_grad(model, data)
        direction = grads[idx[j]].mean(axis=0)
        trajectory[t] = (bm[j], float(np.linalg.norm(direction)), np.nan, 1)
        coef = coef - config.step_size * direction
        done = t + 1
        if config.tol is not None and config.step_size * float(np.linalg.norm(direction)) <= config.tol:
            break
    return FitReport(coef, trajectory[:done], float("nan"), done)


def _stage1_partition(n_samples: int, config: OptimConfig) -> BlockPartition:
    # Mirrors the construction inside fit_fixed_blocks so the stage-1
    # objective can be re-evaluated on identical blocks.
    rng = np.random.default_rng(config.seed)
    return make_partition(
        n_samples, config.k, seed=int(rng.integers(0, 2 ** 63 - 1)), shuffle=True
    )


def fit_two_stage(
    data: Dataset,
    config1: OptimConfig,
    config2: OptimConfig,
    excess_bound: float,
) -> FitReport:
    """Two-stage fit: robust pilot fit, then loss-difference refinement.

    The data is split into halves S1/S2 by a seeded permutation (sizes
    differ by at most one).  Stage one runs :func:`fit_fixed_blocks` on S1
    with ``config1``.  Stage two descends, over a fixed partition of S2, a
    robust estimate of the per-sample loss differences against the stage-one
    pilot; a candidate step is rejected (and the step size temporarily
    halved) whenever the pilot's empirical excess risk on S1 would exceed
    ``excess_bound``.  Stage two always starts from the pilot coefficients,
    which are feasible by construction; ``config2.coef0`` is ignored.

    The report describes stage two: ``loss_estimate`` rows in the
    trajectory are robust means of loss differences, and ``skipped`` counts
    rejected steps.
    """
    if not excess_bound > 0:
        raise ValueError("excess_bound must be positive")
    if config1.loss is not config2.loss:
        raise ValueError("both stages must use the same loss")
    order = np.random.default_rng(config1.seed).permutation(data.n_samples)
    half = (data.n_samples + 1) // 2
    s1 = data.subset(order[:half])
    s2 = data.subset(order[half:])

    stage1 = fit_fixed_blocks(s1, config1)
    pilot = Model(stage1.coef, config1.loss)

    part1 = _stage1_partition(s1.n_samples, config1)
    mean_cfg1 = RobustMeanConfig(
        k=config1.k, delta=stage1.delta_final,
        mw_tol=config1.mw_tol, mw_max_iter=config1.mw_max_iter,
        residual_tol=config1.residual_tol,
    )
    pilot_risk = robust_loss_at(pilot, s1, part1, mean_cfg1).estimate

    def excess_on_s1(candidate: np.ndarray) -> float:
        model = Model(candidate, config1.loss)
        return robust_loss_at(model, s1, part1, mean_cfg1).estimate - pilot_risk

    rng2 = np.random.default_rng(config2.seed)
    part2 = make_partition(
        s2.n_samples, config2.k, seed=int(rng2.integers(0, 2 ** 63 - 1)), shuffle=True
    )
    n2 = part2.n
    root_of = math.sqrt(n2)
    base_losses = per_sample_loss(pilot, s2)
    delta = _initial_delta(config2.delta_mode)
    mad_mode = isinstance(config2.delta_mode, MadBurnIn)
    coef = stage1.coef.copy()
    trajectory = np.empty((config2.max_iter, 4))
    rejected = 0
    done = 0
    shrink = 1.0
    for t in range(config2.max_iter):
        model = Model(coef, config2.loss)
        diffs = per_sample_loss(model, s2) - base_losses
        _check_losses(diffs, t)
        bm = diffs[part2.indices].mean(axis=1)
        estimate, _, _ = _mw_root(
            bm, n2, delta, HUBER,
            config2.mw_tol, config2.mw_max_iter, config2.residual_tol,
        )
        active = np.abs(bm - estimate) <= delta / root_of
        if not active.any():
            raise DegenerateGradientError(
                f"no active block at refinement iteration {t}; increase delta",
                iteration=t,
            )
        grads = per_sample_loss_grad(model, s2)
        direction = grads[part2.indices].mean(axis=1)[active].mean(axis=0)
        trajectory[t] = (estimate, float(np.linalg.norm(direction)), delta, active.sum())
        if mad_mode and t < config2.delta_mode.burn_in:
            delta = _next_delta(bm, delta)
        candidate = coef - shrink * config2.step_size * direction
        if math.isinf(excess_bound) or excess_on_s1(candidate) <= excess_bound:
            step_norm = float(np.linalg.norm(candidate - coef))
            coef = candidate
            shrink = 1.0
            done = t + 1
            if config2.tol is not None and step_norm <= config2.tol:
                break
        else:
            # Rejected: stay at the previous iterate and try a shorter step
            # next time, otherwise an identical candidate would be proposed
            # forever on this fixed partition.
            rejected += 1
            shrink *= 0.5
            done = t + 1
    return FitReport(coef, trajectory[:done], delta, done, rejected)
