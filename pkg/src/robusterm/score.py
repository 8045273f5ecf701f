"""Score functions for the block M-estimator of the mean.

The estimator replaces the arithmetic mean of block averages by the root of
a clipped score equation.  The score used throughout is Huber's: quadratic
near zero and linear in the tails, so its derivative is the familiar
clipping function.  The truncation scale is deliberately not a parameter of
the score itself; estimators standardize their residuals by an explicit
``delta`` before applying it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class ScoreKind(Enum):
    """Implemented score families."""

    HUBER = "huber"


@dataclass(frozen=True)
class ScoreFunction:
    """Convex, even score whose derivative saturates outside [-1, 1].

    ``value`` is the score itself, ``prime`` its derivative (the influence
    curve of the location estimate) and ``second`` its second derivative.
    All three accept scalars or arrays and vectorize over the input.
    """

    kind: ScoreKind = ScoreKind.HUBER

    def value(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        return np.where(ax <= 1.0, 0.5 * x * x, ax - 0.5)

    def prime(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip(x, -1.0, 1.0)

    def second(self, x):
        # Closed indicator: second(+-1) == 1.  Downstream gradient formulas
        # inherit the closed window |r| <= 1 for deciding active blocks.
        x = np.asarray(x, dtype=float)
        return (np.abs(x) <= 1.0).astype(float)

    def weight(self, x):
        """Reweighting factor prime(x)/x with the singularity at 0 set to 1."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        out = np.ones_like(ax)
        np.divide(1.0, ax, out=out, where=ax > 1.0)
        return out


HUBER = ScoreFunction(ScoreKind.HUBER)
