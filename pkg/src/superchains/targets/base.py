"""Target-model contract shared by all posterior families.

log_density and gradient are vectorized over leading axes: input shape
(..., D) yields log densities of shape (...) and gradients of shape
(..., D).  Gradients are hand-derived per family; `finite_difference_gradient`
is the independent check used by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import InvalidParameterError

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class BenchmarkMoments:
    """Per-dimension reference mean/variance with provenance.

    provenance is "analytic" for closed forms, "long-run-oracle" for cached
    sampler output; config carries whatever produced the values.
    """

    mean: np.ndarray
    variance: np.ndarray
    provenance: str
    config: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TargetModel:
    """A differentiable unnormalized log density on R^D."""

    name: str
    dim: int
    log_density: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    analytic_moments: BenchmarkMoments | None = None

    def check_point(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape[-1] != self.dim:
            raise InvalidParameterError(
                f"{self.name} expects dimension {self.dim}, got {theta.shape[-1]}"
            )
        return theta


def finite_difference_gradient(
    target: TargetModel,
    theta: np.ndarray,
    coords: np.ndarray | None = None,
) -> np.ndarray:
    """Central differences with per-coordinate h = 1e-5 * (1 + |theta_i|).

    coords optionally restricts to a subset of coordinates (returned in that
    order); used for very high-dimensional targets.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 1:
        raise InvalidParameterError("finite differences operate on a single point")
    if coords is None:
        coords = np.arange(theta.shape[0])
    out = np.empty(len(coords), dtype=np.float64)
    for j, i in enumerate(coords):
        h = 1e-5 * (1.0 + abs(theta[i]))
        hi = theta.copy()
        lo = theta.copy()
        hi[i] += h
        lo[i] -= h
        out[j] = (float(target.log_density(hi)) - float(target.log_density(lo))) / (2.0 * h)
    return out


def normal_logpdf(x, mean, sd):
    """Vectorized N(mean, sd^2) log density (sd is a standard deviation)."""
    z = (x - mean) / sd
    return -0.5 * z * z - np.log(sd) - 0.5 * LOG_2PI


def log_sigmoid(x):
    """log(1/(1+e^-x)) evaluated stably on both tails."""
    return np.where(x > 0, -np.log1p(np.exp(-np.abs(x))), x - np.log1p(np.exp(-np.abs(x))))


def sigmoid(x):
    out = np.empty_like(np.asarray(x, dtype=np.float64))
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
