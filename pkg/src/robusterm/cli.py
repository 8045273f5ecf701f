"""Command line front end for the robust fitting experiments.

Usage is flag-driven: ``robusterm --command fit --dataset linear-a --algo
alg3 --k 71 --delta-mode mad --out-dir results``.  Commands:

* ``fit``           fit one algorithm on one dataset, write coefficients,
                    the optimizer trajectory and a scatter figure;
* ``sweep-k``       Monte Carlo metric summaries over a grid of block counts;
* ``sweep-delta``   the same over a grid of truncation scales (for each of
                    several block counts);
* ``compare-algos`` Monte Carlo metric summaries for several algorithms on
                    identical data;
* ``cv``            robust median cross-validation fold scores;
* ``reproduce-figure`` canned configurations of the commands above.

Algorithms: ``alg1`` (fixed random partition descent), ``alg3``
(permutation-resampled descent), ``alg4`` (median-block descent),
``two-stage`` (pilot fit plus loss-difference refinement), ``ols`` and
``plain-logistic`` (non-robust baselines).

Datasets: ``blobs``, ``blobs-clean``, ``linear-a`` (response outliers),
``linear-b`` (joint predictor/response outliers), ``linear-clean``,
``moons``, ``moons-clean``, ``heavy`` (heavy-tailed noise, no outliers).
Alternatively ``--csv PATH`` reads the ``z1,...,zd,y,is_outlier`` exchange
format; targets that are all +-1 make it a classification task.

A config file (``--config PATH``) may hold ``key = value`` lines using the
long flag names without the leading dashes (``#`` starts a comment).
Precedence is command line over file over built-in defaults.

CSV outputs are the authoritative artifacts; SVG figures are advisory.
Floats are written with 17 significant digits, and reading a runs file back
reproduces the matching summary file exactly.  Exit codes: 0 on success,
2 on usage or configuration errors, 3 on runtime or numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .baselines import fit_ols, fit_plain_logistic
from .datagen import (
    ClassificationCluster,
    ContaminationSpec,
    FixedPoint,
    GenConfig,
    PredictorOutlier,
    Problem,
    ResponseOutlier,
    dataset_from_csv,
    generate,
    with_intercept,
)
from .descent import (
    DegenerateGradientError,
    FixedDelta,
    MadBurnIn,
    OptimConfig,
    fit_fixed_blocks,
    fit_median_block,
    fit_resampled_blocks,
    fit_two_stage,
)
from .evaluation import accuracy, monte_carlo, mse, robust_cv_median
from .losses import Loss, Model
from . import plots

#: Added to per-run seeds to derive the seed of the clean evaluation set.
_TEST_SEED_OFFSET = 1_000_000_000


class UsageError(Exception):
    """Configuration problem: reported on stderr with exit code 2."""


_COMMANDS = ("fit", "sweep-k", "sweep-delta", "compare-algos", "cv", "reproduce-figure")
_ALGOS = ("alg1", "alg3", "alg4", "two-stage", "ols", "plain-logistic")

_REGRESSION, _CLASSIFICATION = "regression", "classification"


@dataclass(frozen=True)
class _DatasetInfo:
    problem: Problem
    task: str
    n_clean: int
    n_outliers: int
    kind_factory: object  # () -> contamination kind, or None


_DATASETS = {
    "blobs": _DatasetInfo(
        Problem.GAUSSIAN_BLOBS, _CLASSIFICATION, 600, 30,
        lambda: ClassificationCluster((24.0, 8.0), 0.1, 1.0)),
    "blobs-clean": _DatasetInfo(Problem.GAUSSIAN_BLOBS, _CLASSIFICATION, 600, 0, None),
    "linear-a": _DatasetInfo(
        Problem.LINEAR_MODEL, _REGRESSION, 570, 30,
        lambda: ResponseOutlier(100.0, 0.01)),
    "linear-b": _DatasetInfo(
        Problem.LINEAR_MODEL, _REGRESSION, 570, 30,
        lambda: PredictorOutlier((24.0, 24.0), 0.01)),
    "linear-clean": _DatasetInfo(Problem.LINEAR_MODEL, _REGRESSION, 570, 0, None),
    "moons": _DatasetInfo(
        Problem.TWO_MOONS, _CLASSIFICATION, 900, 100,
        lambda: FixedPoint((0.0, 5.0), 1.0)),
    "moons-clean": _DatasetInfo(Problem.TWO_MOONS, _CLASSIFICATION, 900, 0, None),
    "heavy": _DatasetInfo(Problem.HEAVY_TAIL_REGRESSION, _REGRESSION, 1000, 0, None),
}

_DEFAULTS = {
    "command": None,
    "dataset": None,
    "csv": None,
    "algo": "alg3",
    "k": None,
    "delta": None,
    "delta_mode": None,
    "eta": None,
    "iters": 300,
    "runs": 100,
    "seed": 0,
    "out_dir": "results",
    "k_grid": None,
    "delta_grid": None,
    "folds": 500,
    "burn_in": 10,
    "n_clean": None,
    "n_outliers": None,
    "test_n": 1000,
    "delta_prime": math.inf,
    "figure": None,
    "intercept": "auto",
    "inner_iters": 25,
}


@dataclass(eq=False)
class ExperimentConfig:
    """Fully resolved settings of one command invocation."""

    command: str
    dataset: str | None
    csv: str | None
    algo: str
    k: int | None
    delta: float | None
    delta_mode: str
    eta: float | None
    iters: int
    runs: int
    seed: int
    out_dir: str
    k_grid: list | None
    delta_grid: list | None
    folds: int
    burn_in: int
    n_clean: int | None
    n_outliers: int | None
    test_n: int
    delta_prime: float
    figure: str | None
    intercept: str
    inner_iters: int
    explicit: dict = field(default_factory=dict)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robusterm",
        description="Robust empirical risk minimization experiments",
    )
    add = parser.add_argument
    add("--command", choices=_COMMANDS)
    add("--config", help="key = value file with the same names as the flags")
    add("--dataset", help="named synthetic dataset (see module docs)")
    add("--csv", help="read the dataset from this CSV file instead")
    add("--algo", help="algorithm, or comma-separated list where supported")
    add("--k", help="number of blocks")
    add("--delta", help="fixed truncation scale (or the burn-in start in mad mode)")
    add("--delta-mode", dest="delta_mode", choices=("fixed", "mad"))
    add("--eta", help="gradient step size")
    add("--iters", help="descent iterations")
    add("--runs", help="Monte Carlo repetitions")
    add("--seed", help="base seed")
    add("--out-dir", dest="out_dir", help="directory for CSV and SVG outputs")
    add("--k-grid", dest="k_grid", help="comma-separated block counts")
    add("--delta-grid", dest="delta_grid", help="comma-separated truncation scales")
    add("--folds", help="cross-validation folds")
    add("--burn-in", dest="burn_in", help="mad-mode burn-in iterations")
    add("--n-clean", dest="n_clean", help="clean rows to generate")
    add("--n-outliers", dest="n_outliers", help="contaminated rows to generate")
    add("--test-n", dest="test_n", help="clean evaluation rows per run")
    add("--delta-prime", dest="delta_prime", help="two-stage excess risk bound")
    add("--figure", help="preset name for reproduce-figure")
    add("--intercept", choices=("auto", "on", "off"))
    add("--inner-iters", dest="inner_iters", help="inner iterations of alg3's risk tracker")
    return parser


def _read_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise UsageError(f"config file not found: {path}")
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key == "config":
                raise UsageError(f"{path}:{lineno}: config files cannot nest")
            if key not in _DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key '{key}'")
            values[key] = value
    return values


def _to_int(name: str, value) -> int:
    try:
        return int(str(value))
    except ValueError:
        raise UsageError(f"--{name.replace('_', '-')} expects an integer, got {value!r}")


def _to_float(name: str, value) -> float:
    try:
        return float(str(value))
    except ValueError:
        raise UsageError(f"--{name.replace('_', '-')} expects a number, got {value!r}")


def _to_grid(name: str, value, convert) -> list:
    items = [part.strip() for part in str(value).split(",") if part.strip()]
    if not items:
        raise UsageError(f"--{name.replace('_', '-')} must list at least one value")
    return [convert(name, item) for item in items]


def parse_experiment(argv=None) -> ExperimentConfig:
    """Parse flags, merge the optional config file, and validate."""
    parser = _build_parser()
    namespace = parser.parse_args(argv)
    explicit = {
        key: value
        for key, value in vars(namespace).items()
        if key != "config" and value is not None
    }
    merged = dict(_DEFAULTS)
    if namespace.config is not None:
        merged.update(_read_config_file(namespace.config))
    merged.update(explicit)
    return _resolve(merged, explicit)


def _resolve(merged: dict, explicit: dict) -> ExperimentConfig:
    command = merged["command"]
    if command is None:
        raise UsageError("--command is required")
    if command not in _COMMANDS:
        raise UsageError(f"unknown command {command!r}; choose from {', '.join(_COMMANDS)}")
    if merged["intercept"] not in ("auto", "on", "off"):
        raise UsageError("--intercept must be auto, on or off")

    delta = None if merged["delta"] is None else _to_float("delta", merged["delta"])
    if delta is not None and not delta > 0:
        raise UsageError("--delta must be positive")
    delta_mode = merged["delta_mode"]
    if delta_mode is None:
        fixed = delta is not None or merged["delta_grid"] is not None
        delta_mode = "fixed" if fixed else "mad"
    if delta_mode not in ("fixed", "mad"):
        raise UsageError("--delta-mode must be fixed or mad")

    k_grid = merged["k_grid"]
    if k_grid is not None:
        k_grid = _to_grid("k_grid", k_grid, _to_int)
        if any(k < 1 for k in k_grid):
            raise UsageError("--k-grid entries must be at least 1")
    delta_grid = merged["delta_grid"]
    if delta_grid is not None:
        delta_grid = _to_grid("delta_grid", delta_grid, _to_float)
        if any(not d > 0 for d in delta_grid):
            raise UsageError("--delta-grid entries must be positive")

    config = ExperimentConfig(
        command=command,
        dataset=merged["dataset"],
        csv=merged["csv"],
        algo=str(merged["algo"]),
        k=None if merged["k"] is None else _to_int("k", merged["k"]),
        delta=delta,
        delta_mode=delta_mode,
        eta=None if merged["eta"] is None else _to_float("eta", merged["eta"]),
        iters=_to_int("iters", merged["iters"]),
        runs=_to_int("runs", merged["runs"]),
        seed=_to_int("seed", merged["seed"]),
        out_dir=str(merged["out_dir"]),
        k_grid=k_grid,
        delta_grid=delta_grid,
        folds=_to_int("folds", merged["folds"]),
        burn_in=_to_int("burn_in", merged["burn_in"]),
        n_clean=None if merged["n_clean"] is None else _to_int("n_clean", merged["n_clean"]),
        n_outliers=None if merged["n_outliers"] is None else _to_int("n_outliers", merged["n_outliers"]),
        test_n=_to_int("test_n", merged["test_n"]),
        delta_prime=_to_float("delta_prime", merged["delta_prime"]),
        figure=merged["figure"],
        intercept=str(merged["intercept"]),
        inner_iters=_to_int("inner_iters", merged["inner_iters"]),
        explicit=explicit,
    )
    if config.k is not None and config.k < 1:
        raise UsageError("--k must be at least 1")
    if config.iters < 0:
        raise UsageError("--iters must be nonnegative")
    if config.runs < 1:
        raise UsageError("--runs must be at least 1")
    if config.folds < 2:
        raise UsageError("--folds must be at least 2")
    if config.burn_in < 0:
        raise UsageError("--burn-in must be nonnegative")
    if config.inner_iters < 1:
        raise UsageError("--inner-iters must be at least 1")
    if not config.delta_prime > 0:
        raise UsageError("--delta-prime must be positive")
    if config.test_n < 1:
        raise UsageError("--test-n must be at least 1")
    return config


def _algo_list(config: ExperimentConfig) -> list:
    names = [part.strip() for part in config.algo.split(",") if part.strip()]
    if not names:
        raise UsageError("--algo must name at least one algorithm")
    for name in names:
        if name not in _ALGOS:
            raise UsageError(f"unknown algorithm {name!r}; choose from {', '.join(_ALGOS)}")
    if len(set(names)) != len(names):
        raise UsageError("--algo contains duplicate algorithm names")
    return names


def _dataset_info(config: ExperimentConfig) -> _DatasetInfo:
    if config.dataset is None:
        raise UsageError("--dataset (or --csv) is required for this command")
    info = _DATASETS.get(config.dataset)
    if info is None:
        raise UsageError(
            f"unknown dataset {config.dataset!r}; choose from {', '.join(sorted(_DATASETS))}"
        )
    return info


def _gen_config(info: _DatasetInfo, config: ExperimentConfig, seed: int,
                clean_only: bool = False, n_override: int | None = None) -> GenConfig:
    n_clean = n_override if n_override is not None else (
        config.n_clean if config.n_clean is not None else info.n_clean)
    n_out = 0 if clean_only else (
        config.n_outliers if config.n_outliers is not None else info.n_outliers)
    contamination = ContaminationSpec(n_out, info.kind_factory() if n_out else None)
    return GenConfig(info.problem, n_clean, contamination, seed)


def _load_train_data(config: ExperimentConfig, seed: int):
    """Training dataset and its task, from --csv or a named generator."""
    if config.csv is not None:
        try:
            data = dataset_from_csv(config.csv)
        except FileNotFoundError as exc:
            raise UsageError(str(exc)) from exc
        task = _CLASSIFICATION if np.all(np.abs(data.targets) == 1.0) else _REGRESSION
        return data, task
    info = _dataset_info(config)
    return generate(_gen_config(info, config, seed)), info.task


def _use_intercept(config: ExperimentConfig, task: str) -> bool:
    if config.intercept == "auto":
        return task == _CLASSIFICATION
    return config.intercept == "on"


def _prepare(data, config: ExperimentConfig, task: str):
    return with_intercept(data) if _use_intercept(config, task) else data


def _delta_mode(config: ExperimentConfig, task: str):
    if config.delta_mode == "fixed":
        if config.delta is None:
            raise UsageError("--delta is required when --delta-mode is fixed")
        return FixedDelta(config.delta)
    if config.delta is not None:
        delta0 = config.delta
    else:
        # The burn-in start only has to survive until the first adaptive
        # update, so it must exceed the loss scale at the zero start:
        # squared errors on the regression datasets are of order 10^2.
        delta0 = 0.1 if task == _CLASSIFICATION else 100.0
    return MadBurnIn(config.burn_in, delta0)


def _optim_config(config: ExperimentConfig, task: str, seed: int,
                  k: int | None = None, delta_mode=None) -> OptimConfig:
    if k is None:
        k = config.k
    if k is None:
        raise UsageError("--k is required for this algorithm")
    loss = Loss.LOGISTIC if task == _CLASSIFICATION else Loss.QUADRATIC
    eta = config.eta
    if eta is None:
        eta = 1.0 if task == _CLASSIFICATION else 0.05
    return OptimConfig(
        k=k,
        step_size=eta,
        max_iter=config.iters,
        delta_mode=delta_mode if delta_mode is not None else _delta_mode(config, task),
        loss=loss,
        seed=seed,
        inner_iters=config.inner_iters,
    )


def _fit_model(algo: str, data, config: ExperimentConfig, task: str, seed: int,
               k: int | None = None, delta_mode=None):
    """Fit one algorithm; returns (Model, FitReport or None)."""
    if algo == "ols":
        if task != _REGRESSION:
            raise UsageError("ols requires a regression dataset")
        return fit_ols(data), None
    if algo == "plain-logistic":
        if task != _CLASSIFICATION:
            raise UsageError("plain-logistic requires a classification dataset")
        return fit_plain_logistic(data), None
    optim = _optim_config(config, task, seed, k=k, delta_mode=delta_mode)
    if algo == "alg1":
        report = fit_fixed_blocks(data, optim)
    elif algo == "alg3":
        report = fit_resampled_blocks(data, optim)
    elif algo == "alg4":
        report = fit_median_block(data, optim)
    elif algo == "two-stage":
        report = fit_two_stage(data, optim, optim, config.delta_prime)
    else:
        raise UsageError(f"unknown algorithm {algo!r}")
    return Model(report.coef, optim.loss), report


def _metric(task: str):
    """(name, fn, clean test needed) for the task's headline metric."""
    if task == _CLASSIFICATION:
        return "accuracy", accuracy
    return "mse", mse


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _ensure_out_dir(config: ExperimentConfig) -> str:
    os.makedirs(config.out_dir, exist_ok=True)
    return config.out_dir


def _run_experiments(config: ExperimentConfig, info: _DatasetInfo, algo: str,
                     k: int | None, delta_mode):
    """Held-out metric values for one Monte Carlo configuration.

    Each run draws fresh training data from ``seed`` and evaluates on a
    clean dataset drawn from ``seed + _TEST_SEED_OFFSET``.  Runs that abort
    because every block leaves the truncation window are recorded as nan
    (sweeps exist precisely to map out where a configuration breaks down)
    and are excluded from the summary statistics.
    """
    metric_name, metric_fn = _metric(info.task)
    deltas = []

    def experiment(seed: int) -> float:
        train = _prepare(generate(_gen_config(info, config, seed)), config, info.task)
        test = _prepare(
            generate(_gen_config(info, config, seed + _TEST_SEED_OFFSET,
                                 clean_only=True, n_override=config.test_n)),
            config, info.task)
        try:
            model, report = _fit_model(algo, train, config, info.task, seed,
                                       k=k, delta_mode=delta_mode)
        except (DegenerateGradientError, FloatingPointError):
            return float("nan")
        except ValueError as exc:
            if "non-finite losses" in str(exc):
                return float("nan")
            raise
        if report is not None:
            deltas.append(report.delta_final)
        return metric_fn(model, test)

    summary = monte_carlo(config.runs, experiment, base_seed=config.seed)
    delta_final = float(np.median(deltas)) if deltas else float("nan")
    return metric_name, summary.values, delta_final


def _nan_stats(values) -> tuple:
    """(median, mean, std) ignoring nan runs; all-nan gives three nans."""
    values = np.asarray(values, dtype=float)
    if np.isnan(values).all():
        return float("nan"), float("nan"), float("nan")
    return (float(np.nanmedian(values)), float(np.nanmean(values)),
            float(np.nanstd(values)))


def cmd_fit(config: ExperimentConfig) -> int:
    algos = _algo_list(config)
    if len(algos) != 1:
        raise UsageError("fit takes exactly one --algo")
    algo = algos[0]
    raw, task = _load_train_data(config, config.seed)
    data = _prepare(raw, config, task)
    model, report = _fit_model(algo, data, config, task, config.seed)
    out = _ensure_out_dir(config)
    augmented = _use_intercept(config, task)

    names = [f"z{i + 1}" for i in range(raw.n_features)]
    if augmented:
        names.append("intercept")
    _write_csv(os.path.join(out, "coef.csv"), names, [list(model.coef)])
    if report is not None:
        _write_csv(
            os.path.join(out, "trajectory.csv"),
            ("iteration", "loss_estimate", "grad_norm", "delta", "active_blocks"),
            [[t] + list(row) for t, row in enumerate(report.trajectory)],
        )
    if task == _REGRESSION and raw.n_features == 1:
        slope = float(model.coef[0])
        intercept = float(model.coef[1]) if augmented else 0.0
        plots.save_regression_fit(
            os.path.join(out, "fit.svg"), raw, [(algo, slope, intercept)],
            f"{algo} on {config.dataset or config.csv}")
        print(f"slope: {slope:.17g}")
        print(f"intercept: {intercept:.17g}")
        print(f"train_mse: {mse(model, data):.17g}")
    elif task == _CLASSIFICATION and raw.n_features == 2:
        coef3 = list(model.coef) + ([] if augmented else [0.0])
        plots.save_classification_fit(
            os.path.join(out, "fit.svg"), raw, [(algo, coef3)],
            f"{algo} on {config.dataset or config.csv}")
        print(f"train_accuracy: {accuracy(model, data):.17g}")
    else:
        print(f"coef: {' '.join(_fmt(float(c)) for c in model.coef)}")
    if report is not None:
        print(f"delta_final: {report.delta_final:.17g}")
        print(f"iterations: {report.iterations}")
        print(f"skipped: {report.skipped}")
    print(f"outputs: {out}")
    return 0


def cmd_sweep_k(config: ExperimentConfig) -> int:
    if config.k_grid is None:
        raise UsageError("--k-grid is required for sweep-k")
    algos = _algo_list(config)
    if len(algos) != 1:
        raise UsageError("sweep-k takes exactly one --algo")
    info = _dataset_info(config)
    delta_mode = _delta_mode(config, info.task)
    out = _ensure_out_dir(config)
    summary_rows, run_rows, curve = [], [], []
    metric_name = None
    for k in config.k_grid:
        metric_name, values, _ = _run_experiments(config, info, algos[0], k, delta_mode)
        med, mean, std = _nan_stats(values)
        summary_rows.append([k, metric_name, med, mean, std])
        run_rows.extend([k, i, config.seed + i, v] for i, v in enumerate(values))
        curve.append(med)
    _write_csv(os.path.join(out, "sweep_k_summary.csv"),
               ("k", "metric", "metric_median", "metric_mean", "metric_std"),
               summary_rows)
    _write_csv(os.path.join(out, "sweep_k_runs.csv"),
               ("k", "run", "seed", "metric"), run_rows)
    plots.save_metric_curves(
        os.path.join(out, "sweep_k.svg"),
        {algos[0]: (config.k_grid, curve)},
        "k", f"median {metric_name}", f"{metric_name} vs block count")
    for row in summary_rows:
        print(f"k={row[0]} median_{row[1]}={_fmt(row[2])}")
    print(f"outputs: {out}")
    return 0


def cmd_sweep_delta(config: ExperimentConfig) -> int:
    algos = _algo_list(config)
    if len(algos) != 1:
        raise UsageError("sweep-delta takes exactly one --algo")
    info = _dataset_info(config)
    ks = config.k_grid if config.k_grid is not None else [61, 91, 151]
    if config.delta_mode == "mad":
        # Adaptive mode has nothing to sweep: one run per k, recording the
        # scale the burn-in settled on.
        grid = [None]
    else:
        if config.delta_grid is None:
            raise UsageError("--delta-grid is required for sweep-delta in fixed mode")
        grid = config.delta_grid
    out = _ensure_out_dir(config)
    summary_rows, run_rows = [], []
    curves = {}
    metric_name = None
    for k in ks:
        xs, ys = [], []
        for delta in grid:
            mode = _delta_mode(config, info.task) if delta is None else FixedDelta(delta)
            metric_name, values, delta_final = _run_experiments(
                config, info, algos[0], k, mode)
            med, mean, std = _nan_stats(values)
            delta_out = delta_final if delta is None else delta
            summary_rows.append([k, delta_out, metric_name, med, mean, std])
            run_rows.extend(
                [k, delta_out, i, config.seed + i, v]
                for i, v in enumerate(values))
            xs.append(delta_out)
            ys.append(med)
        curves[f"k={k}"] = (xs, ys)
    _write_csv(os.path.join(out, "sweep_delta_summary.csv"),
               ("k", "delta", "metric", "metric_median", "metric_mean", "metric_std"),
               summary_rows)
    _write_csv(os.path.join(out, "sweep_delta_runs.csv"),
               ("k", "delta", "run", "seed", "metric"), run_rows)
    plots.save_metric_curves(
        os.path.join(out, "sweep_delta.svg"), curves,
        "delta", f"median {metric_name}", f"{metric_name} vs truncation scale",
        loglog=len(grid) > 1)
    for row in summary_rows:
        print(f"k={row[0]} delta={_fmt(row[1])} median_{row[2]}={_fmt(row[3])}")
    print(f"outputs: {out}")
    return 0


def cmd_compare_algos(config: ExperimentConfig) -> int:
    algos = _algo_list(config)
    if len(algos) < 2:
        raise UsageError("compare-algos needs at least two --algo names")
    info = _dataset_info(config)
    out = _ensure_out_dir(config)
    n_out = config.n_outliers if config.n_outliers is not None else info.n_outliers
    n_clean = config.n_clean if config.n_clean is not None else info.n_clean
    summary_rows, run_rows = [], []
    medians, stds = [], []
    metric_name = None
    for algo in algos:
        delta_mode = None if algo in ("ols", "plain-logistic") else _delta_mode(config, info.task)
        metric_name, values, _ = _run_experiments(config, info, algo, config.k, delta_mode)
        med, mean, std = _nan_stats(values)
        summary_rows.append(
            [algo, n_clean + n_out, n_out, metric_name, med, mean, std])
        run_rows.extend(
            [algo, i, config.seed + i, v] for i, v in enumerate(values))
        medians.append(med)
        stds.append(std)
    _write_csv(os.path.join(out, "compare_summary.csv"),
               ("algorithm", "n_samples", "n_outliers", "metric",
                "metric_median", "metric_mean", "metric_std"),
               summary_rows)
    _write_csv(os.path.join(out, "compare_runs.csv"),
               ("algorithm", "run", "seed", "metric"), run_rows)
    plots.save_metric_bars(
        os.path.join(out, "compare.svg"), algos, medians, stds,
        f"median {metric_name}", f"{config.dataset}: algorithm comparison")
    for row in summary_rows:
        print(f"{row[0]}: median_{row[3]}={_fmt(row[4])} mean={_fmt(row[5])} std={_fmt(row[6])}")
    print(f"outputs: {out}")
    return 0


def cmd_cv(config: ExperimentConfig) -> int:
    algos = _algo_list(config)
    raw, task = _load_train_data(config, config.seed)
    data = _prepare(raw, config, task)
    metric_name, metric_fn = _metric(task)
    if task == _CLASSIFICATION:
        metric_name, metric_fn = "error", (lambda model, fold: 1.0 - accuracy(model, fold))
    out = _ensure_out_dir(config)
    rows = []
    hists = {}
    for algo in algos:
        trainer = lambda subset, _algo=algo: _fit_model(
            _algo, subset, config, task, config.seed)[0]
        report = robust_cv_median(data, config.folds, trainer,
                                  seed=config.seed, score=metric_fn)
        rows.extend([algo, j, s] for j, s in enumerate(report.fold_scores))
        if task == _REGRESSION:
            hists[algo] = np.log(report.fold_scores[report.fold_scores > 0])
        else:
            hists[algo] = report.fold_scores
        print(f"{algo}: median_{metric_name}={_fmt(report.median_score)}")
    _write_csv(os.path.join(out, "cv_scores.csv"),
               ("algorithm", "fold", "score"), rows)
    xlabel = f"log {metric_name}" if task == _REGRESSION else metric_name
    plots.save_score_histogram(os.path.join(out, "cv.svg"), hists, xlabel,
                               f"{config.folds}-fold robust CV")
    print(f"outputs: {out}")
    return 0


_FIGURES = {
    "scatter-reg-a": {"command": "fit", "dataset": "linear-a", "algo": "alg3",
                      "k": "71", "delta_mode": "mad", "iters": "300"},
    "scatter-reg-b": {"command": "fit", "dataset": "linear-b", "algo": "alg3",
                      "k": "71", "delta_mode": "mad", "iters": "300"},
    "scatter-blobs": {"command": "fit", "dataset": "blobs", "algo": "alg3",
                      "k": "61", "delta_mode": "mad", "iters": "300"},
    "choice-k": {"command": "sweep-k", "dataset": "linear-b", "algo": "alg3",
                 "k_grid": "21,31,41,51,61,71,81,91,101", "delta_mode": "mad",
                 "eta": "0.01", "iters": "600", "burn_in": "600", "runs": "100"},
    "select-delta": {"command": "sweep-delta", "dataset": "linear-b",
                     "algo": "alg3", "delta_grid": "0.1,1,10,100,1000,10000",
                     "k_grid": "61,91,151", "delta_mode": "fixed", "runs": "30",
                     "eta": "0.01", "iters": "600"},
    "comp-shuffle": {"command": "compare-algos", "dataset": "linear-a",
                     "algo": "alg1,alg3", "k": "71", "delta": "1",
                     "delta_mode": "fixed", "runs": "500"},
    "moons-compare": {"command": "compare-algos", "dataset": "moons",
                "algo": "alg3,alg4,plain-logistic", "k": "251",
                "delta": "0.005", "delta_mode": "fixed", "runs": "100"},
    "cv-hist": {"command": "cv", "dataset": "linear-a", "algo": "alg3,ols",
                "k": "71", "delta_mode": "mad", "folds": "500"},
}


def cmd_reproduce_figure(config: ExperimentConfig) -> int:
    if config.figure is None:
        raise UsageError(
            f"--figure is required; choose from {', '.join(sorted(_FIGURES))}")
    preset = _FIGURES.get(config.figure)
    if preset is None:
        raise UsageError(
            f"unknown figure {config.figure!r}; choose from {', '.join(sorted(_FIGURES))}")
    merged = dict(_DEFAULTS)
    merged.update(preset)
    # Explicit flags win over the preset so runs/seeds can be dialed down.
    merged.update({k: v for k, v in config.explicit.items()
                   if k not in ("command", "figure")})
    return run(_resolve(merged, config.explicit))


_DISPATCH = {
    "fit": cmd_fit,
    "sweep-k": cmd_sweep_k,
    "sweep-delta": cmd_sweep_delta,
    "compare-algos": cmd_compare_algos,
    "cv": cmd_cv,
    "reproduce-figure": cmd_reproduce_figure,
}


def run(config: ExperimentConfig) -> int:
    return _DISPATCH[config.command](config)


def main(argv=None) -> int:
    try:
        config = parse_experiment(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
