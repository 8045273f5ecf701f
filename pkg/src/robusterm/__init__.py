"""Robust empirical risk minimization over blocked data.

The core primitive is a truncated M-estimator of a mean computed from block
averages; on top of it sit gradient descent routines for linear models, data
generators with controlled contamination, Monte Carlo evaluation helpers and
a command line interface (``python -m robusterm --help``).
"""

from .score import HUBER, ScoreFunction, ScoreKind
from .robust_mean import (
    BlockPartition,
    RobustMeanConfig,
    RobustMeanResult,
    block_means,
    mad_delta,
    make_partition,
    robust_mean_fixed,
    robust_mean_sgd,
)
from .losses import Dataset, Loss, Model, per_sample_loss, per_sample_loss_grad
from .descent import (
    TRAJECTORY_COLUMNS,
    DegenerateGradientError,
    FitReport,
    FixedDelta,
    MadBurnIn,
    OptimConfig,
    fit_fixed_blocks,
    fit_median_block,
    fit_resampled_blocks,
    fit_two_stage,
    robust_gradient,
    robust_loss_at,
)
from .datagen import (
    CLEAN,
    ClassificationCluster,
    ContaminationSpec,
    FixedPoint,
    GenConfig,
    PredictorOutlier,
    Problem,
    ResponseOutlier,
    dataset_from_csv,
    dataset_to_csv,
    gen_heavy_tail,
    gen_linear,
    gen_logistic_blobs,
    gen_two_moons,
    generate,
    with_intercept,
)
from .evaluation import (
    CVReport,
    MonteCarloSummary,
    accuracy,
    monte_carlo,
    mse,
    robust_cv_median,
)
from .baselines import fit_ols, fit_plain_logistic
from .estimators import RobustBlockClassifier, RobustBlockRegressor

__version__ = "0.1.0"

__all__ = [
    "HUBER",
    "ScoreFunction",
    "ScoreKind",
    "BlockPartition",
    "RobustMeanConfig",
    "RobustMeanResult",
    "block_means",
    "mad_delta",
    "make_partition",
    "robust_mean_fixed",
    "robust_mean_sgd",
    "Dataset",
    "Loss",
    "Model",
    "per_sample_loss",
    "per_sample_loss_grad",
    "TRAJECTORY_COLUMNS",
    "DegenerateGradientError",
    "FitReport",
    "FixedDelta",
    "MadBurnIn",
    "OptimConfig",
    "fit_fixed_blocks",
    "fit_median_block",
    "fit_resampled_blocks",
    "fit_two_stage",
    "robust_gradient",
    "robust_loss_at",
    "CLEAN",
    "ClassificationCluster",
    "ContaminationSpec",
    "FixedPoint",
    "GenConfig",
    "PredictorOutlier",
    "Problem",
    "ResponseOutlier",
    "dataset_from_csv",
    "dataset_to_csv",
    "gen_heavy_tail",
    "gen_linear",
    "gen_logistic_blobs",
    "gen_two_moons",
    "generate",
    "with_intercept",
    "CVReport",
    "MonteCarloSummary",
    "accuracy",
    "monte_carlo",
    "mse",
    "robust_cv_median",
    "fit_ols",
    "fit_plain_logistic",
    "RobustBlockClassifier",
    "RobustBlockRegressor",
    "__version__",
]
