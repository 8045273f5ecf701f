"""Static SVG figures for the command line tool.

The CSV files written next to these figures are the authoritative results;
the figures are a quick visual check.  SVGs are written without a creation
date so repeated runs with the same seed produce identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

# Without a fixed salt matplotlib derives SVG element ids from a
# per-process uuid, which breaks byte-for-byte reproducibility.
plt.rcParams["svg.hashsalt"] = "robusterm"

_SVG_META = {"Date": None}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def _split_mask(data):
    mask = data.outlier_mask
    if mask is None:
        mask = np.zeros(data.n_samples, dtype=bool)
    return mask


def save_regression_fit(path, data, lines, title):
    """Scatter of (z, y) with fitted lines.

    ``lines`` is a list of (label, slope, intercept) triples.  Outlier rows
    are drawn as crosses.
    """
    mask = _split_mask(data)
    z = data.features[:, 0]
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.scatter(z[~mask], data.targets[~mask], s=8, alpha=0.6, label="clean")
    if mask.any():
        ax.scatter(z[mask], data.targets[mask], s=18, marker="x", color="tab:red",
                   label="outliers")
    xs = np.linspace(float(z.min()), float(z.max()), 50)
    for label, slope, intercept in lines:
        ax.plot(xs, slope * xs + intercept, label=label, linewidth=1.5)
    ax.set_xlabel("z")
    ax.set_ylabel("y")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def save_classification_fit(path, data, boundaries, title):
    """Scatter of 2-d features colored by class, with linear boundaries.

    ``boundaries`` is a list of (label, coef) pairs where coef has three
    entries (two feature weights and an intercept weight); the drawn line
    is the zero set of the decision function.
    """
    mask = _split_mask(data)
    z = data.features[:, :2]
    y = data.targets
    fig, ax = plt.subplots(figsize=(6, 4.5))
    clean = ~mask
    for cls, color in ((-1.0, "tab:purple"), (1.0, "tab:olive")):
        sel = clean & (y == cls)
        ax.scatter(z[sel, 0], z[sel, 1], s=8, alpha=0.6, color=color,
                   label=f"class {int(cls):+d}")
    if mask.any():
        ax.scatter(z[mask, 0], z[mask, 1], s=18, marker="x", color="tab:red",
                   label="outliers")
    x_lo, x_hi = float(z[:, 0].min()), float(z[:, 0].max())
    xs = np.linspace(x_lo, x_hi, 50)
    for label, coef in boundaries:
        if abs(coef[1]) > 1e-12:
            ax.plot(xs, -(coef[0] * xs + coef[2]) / coef[1], label=label,
                    linewidth=1.5)
    ax.set_xlabel("z1")
    ax.set_ylabel("z2")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def save_metric_curves(path, curves, xlabel, ylabel, title, loglog=False):
    """Line plot of one metric curve per label; ``curves`` maps label -> (xs, ys)."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, (xs, ys) in curves.items():
        ax.plot(xs, ys, marker="o", markersize=3, linewidth=1.2, label=label)
    if loglog:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def save_metric_bars(path, labels, medians, stds, ylabel, title):
    """Bar chart of per-algorithm medians with std whiskers."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    pos = np.arange(len(labels))
    ax.bar(pos, medians, yerr=stds, capsize=4, width=0.6)
    ax.set_xticks(pos)
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    _save(fig, path)


def save_score_histogram(path, scores_by_label, xlabel, title):
    """Overlaid histograms of (typically log) fold scores per label."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, scores in scores_by_label.items():
        ax.hist(scores, bins=40, alpha=0.5, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("folds")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)
