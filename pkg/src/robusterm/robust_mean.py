"""Blockwise robust estimation of a mean.

Samples are split into ``k`` disjoint blocks of equal size ``n`` (leftovers
are discarded).  The location estimate is the root of

    sum_j prime(sqrt(n) * (mean_j - y) / delta) = 0

where ``mean_j`` is the average over block ``j``.  With a single sample per
block and ``delta`` of order ``sigma * sqrt(N)`` this is a Catoni-style
truncated mean; with large blocks and ``delta`` of order ``sigma`` it
behaves like a median of means.  Anything in between is allowed.

Two solvers are provided: :func:`robust_mean_fixed` works on one fixed
partition and finds the root by iteratively reweighted averaging, while
:func:`robust_mean_sgd` descends the (implicitly permutation-averaged)
objective by drawing a fresh random partition at every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .score import HUBER, ScoreFunction

# Phi^{-1}(3/4); converts a median absolute deviation into a normal-scale
# sigma estimate.
_NORMAL_MAD_FACTOR = 0.6744897501960817


@dataclass(frozen=True, eq=False)
class BlockPartition:
    """Disjoint equal-size blocks of sample indices.

    ``indices`` has shape (k, n); row j lists the members of block j.  The
    ``unused`` tail (the N - n*k leftover indices) is excluded from every
    downstream computation.
    """

    indices: np.ndarray
    unused: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.intp)
        if idx.ndim != 2 or idx.size == 0:
            raise ValueError("indices must be a nonempty (k, n) array")
        unused = np.asarray(self.unused, dtype=np.intp)
        flat = np.concatenate([idx.ravel(), unused])
        if np.unique(flat).size != flat.size:
            raise ValueError("block indices must be pairwise disjoint")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "unused", unused)

    @property
    def k(self) -> int:
        return self.indices.shape[0]

    @property
    def n(self) -> int:
        return self.indices.shape[1]

    @property
    def groups(self) -> list:
        return list(self.indices)


def make_partition(n_samples: int, k: int, seed: int = 0, shuffle: bool = True) -> BlockPartition:
    """Split ``range(n_samples)`` into k blocks of size n = n_samples // k.

    With ``shuffle`` the assignment comes from a seeded uniform permutation;
    otherwise blocks are consecutive index ranges.  The final
    ``n_samples - n*k`` indices of the (possibly permuted) order are left
    out and reported in ``unused``.
    """
    if not 1 <= k <= n_samples:
        raise ValueError(f"k must be in [1, {n_samples}], got {k}")
    n = n_samples // k
    if shuffle:
        order = np.random.default_rng(seed).permutation(n_samples)
    else:
        order = np.arange(n_samples)
    used = n * k
    return BlockPartition(order[:used].reshape(k, n), order[used:])


def block_means(values, partition: BlockPartition) -> np.ndarray:
    """Per-block averages of ``values``, one entry per block."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ValueError("values must be one-dimensional")
    if values.shape[0] <= int(partition.indices.max()):
        raise ValueError(
            f"values has length {values.shape[0]} but the partition indexes "
            f"up to {int(partition.indices.max())}"
        )
    return values[partition.indices].mean(axis=1)


@dataclass(frozen=True)
class RobustMeanConfig:
    """Knobs of the robust mean estimators.

    Parameters
    ----------
    k : int
        Intended number of blocks.  :func:`robust_mean_fixed` checks it
        against the supplied partition; :func:`robust_mean_sgd` derives its
        own count from the block size and ignores this field.
    delta : float
        Truncation scale.  Block residuals are standardized as
        ``sqrt(n) * (mean_j - y) / delta`` before the score is applied.
    mw_tol : float
        Stop reweighting once successive iterates move less than this.
    mw_max_iter : int
        Iteration cap for the reweighted averaging solver.
    residual_tol : float
        The ``converged`` flag additionally requires the score equation
        residual to be below ``residual_tol * k``.
    sgd_step : float or None
        Step size for :func:`robust_mean_sgd`.  ``None`` selects
        ``delta**2 / (n * k)``, which caps a fully saturated step at
        ``delta / sqrt(n)`` per score bound unit and makes the quadratic
        regime a direct jump to the average of block means.
    sgd_iters : int
        Number of stochastic steps (fresh permutation each).
    seed : int
        Seed for the permutations drawn by :func:`robust_mean_sgd`.
    """

    k: int
    delta: float
    mw_tol: float = 1e-10
    mw_max_iter: int = 500
    residual_tol: float = 1e-8
    sgd_step: float | None = None
    sgd_iters: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.mw_tol > 0:
            raise ValueError("mw_tol must be positive")
        if self.mw_max_iter < 1 or self.sgd_iters < 1:
            raise ValueError("iteration caps must be at least 1")
        if self.sgd_step is not None and not self.sgd_step > 0:
            raise ValueError("sgd_step must be positive when given")


@dataclass(frozen=True, eq=False)
class RobustMeanResult:
    """Outcome of a robust mean computation.

    ``block_means`` and ``active`` are diagnostics: for the fixed-partition
    solver they refer to the partition it was given, for the stochastic
    solver to the last permutation drawn.  ``active`` marks blocks whose
    mean lies within ``delta / sqrt(n)`` of the estimate, i.e. inside the
    quadratic region of the score.
    """

    estimate: float
    block_means: np.ndarray
    active: np.ndarray
    iterations: int
    converged: bool


def _as_finite_values(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("values must be a nonempty one-dimensional array")
    if not np.isfinite(values).all():
        raise ValueError("values must be finite")
    return values


def _mw_root(bm, n, delta, score, mw_tol, mw_max_iter, residual_tol):
    """Root of the block score equation by iteratively reweighted averaging.

    Starts from the median of block means; each sweep recomputes weights
    prime(r)/r and takes the weighted average.  Returns
    (estimate, iterations, converged).
    """
    scale = math.sqrt(n) / delta
    y = float(np.median(bm))
    change = 0.0
    iterations = 0
    for iterations in range(1, mw_max_iter + 1):
        w = score.weight(scale * (bm - y))
        y_new = float(w @ bm / w.sum())
        change = abs(y_new - y)
        y = y_new
        if change <= mw_tol:
            break
    residual = float(np.sum(score.prime(scale * (bm - y))))
    converged = change <= mw_tol and abs(residual) <= residual_tol * bm.shape[0]
    return y, iterations, converged


def robust_mean_fixed(
    values,
    partition: BlockPartition,
    config: RobustMeanConfig,
    score: ScoreFunction = HUBER,
) -> RobustMeanResult:
    """Robust mean of ``values`` over one fixed partition.

    The estimate is the root of the clipped score equation over the block
    means; it always lies between the smallest and largest block mean.
    """
    values = _as_finite_values(values)
    if partition.k != config.k:
        raise ValueError(
            f"config.k={config.k} does not match the partition's k={partition.k}"
        )
    bm = block_means(values, partition)
    estimate, iterations, converged = _mw_root(
        bm, partition.n, config.delta, score,
        config.mw_tol, config.mw_max_iter, config.residual_tol,
    )
    active = np.abs(bm - estimate) <= config.delta / math.sqrt(partition.n)
    return RobustMeanResult(estimate, bm, active, iterations, converged)


def _blocks_from_order(values, order, block_size, n_blocks):
    used = block_size * n_blocks
    return values[order[:used]].reshape(n_blocks, block_size).mean(axis=1)


def _sgd_descend(values, block_size, n_blocks, delta, step, iters, rng, z, score):
    """Stochastic descent steps on the permutation-averaged objective.

    Each step draws a fresh permutation, forms its block means and moves
    ``z`` against the score-equation gradient.  Returns the final iterate
    and the block means of the last permutation drawn.
    """
    scale = math.sqrt(block_size) / delta
    bm = None
    for _ in range(iters):
        order = rng.permutation(values.shape[0])
        bm = _blocks_from_order(values, order, block_size, n_blocks)
        grad = -scale * float(np.sum(score.prime(scale * (bm - z))))
        z -= step * grad
    return z, bm


def robust_mean_sgd(
    values,
    block_size: int,
    config: RobustMeanConfig,
    beta_context=None,
    score: ScoreFunction = HUBER,
) -> RobustMeanResult:
    """Permutation-averaged robust mean by stochastic gradient descent.

    Rather than committing to one partition, every iteration samples a
    uniform permutation, splits it into ``floor(N / block_size)`` blocks
    and takes one gradient step on the resulting score objective.  The
    starting point is the median of the block means of an initial
    permutation, and the returned estimate is the final iterate.

    ``beta_context`` is an opaque pass-through slot for callers that tie
    the values to external model state; it does not affect the result.
    """
    del beta_context
    values = _as_finite_values(values)
    n_samples = values.shape[0]
    if not 1 <= block_size <= n_samples:
        raise ValueError(f"block_size must be in [1, {n_samples}], got {block_size}")
    n_blocks = n_samples // block_size
    rng = np.random.default_rng(config.seed)
    z0 = float(np.median(_blocks_from_order(
        values, rng.permutation(n_samples), block_size, n_blocks)))
    step = config.sgd_step
    if step is None:
        step = config.delta ** 2 / (block_size * n_blocks)
    z, bm = _sgd_descend(
        values, block_size, n_blocks, config.delta, step,
        config.sgd_iters, rng, z0, score,
    )
    scale = math.sqrt(block_size) / config.delta
    residual = float(np.sum(score.prime(scale * (bm - z))))
    active = np.abs(bm - z) <= config.delta / math.sqrt(block_size)
    converged = abs(residual) <= config.residual_tol * n_blocks
    return RobustMeanResult(z, bm, active, config.sgd_iters, converged)


def mad_delta(bm) -> float:
    """Truncation scale from the spread of block means.

    Median absolute deviation of the block means divided by the normal
    quartile, with a floor of ``1e-8 * (1 + |median|)`` so a degenerate
    (zero-MAD) configuration still yields a usable positive scale.
    """
    bm = np.asarray(bm, dtype=float)
    if bm.ndim != 1 or bm.size == 0:
        raise ValueError("block means must be a nonempty one-dimensional array")
    if not np.isfinite(bm).all():
        raise ValueError("block means must be finite")
    med = float(np.median(bm))
    mad = float(np.median(np.abs(bm - med)))
    if mad == 0.0:
        return 1e-8 * (1.0 + abs(med))
    return mad / _NORMAL_MAD_FACTOR
