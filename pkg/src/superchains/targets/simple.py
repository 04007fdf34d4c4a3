"""Closed-form targets: diagonal Gaussian, banana-shaped Gaussian pair,
and a two-component Gaussian mixture with well-separated modes.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParameterError
from .base import LOG_2PI, BenchmarkMoments, TargetModel

MIXTURE_WEIGHT_LOW = 0.3
MIXTURE_WEIGHT_HIGH = 0.7
MIXTURE_MODE = 5.0


def gaussian(dim: int = 1, mu: float = 0.0, sigma: float = 1.0) -> TargetModel:
    """Independent N(mu, sigma^2) in every coordinate."""
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")
    if sigma <= 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    mu = float(mu)
    sigma = float(sigma)
    inv_var = 1.0 / sigma**2

    def log_density(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        z = (theta - mu) / sigma
        return -0.5 * np.sum(z * z, axis=-1) - dim * (np.log(sigma) + 0.5 * LOG_2PI)

    def gradient(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        return -(theta - mu) * inv_var

    moments = BenchmarkMoments(
        mean=np.full(dim, mu),
        variance=np.full(dim, sigma**2),
        provenance="analytic",
    )
    return TargetModel("gaussian", dim, log_density, gradient, moments)


def rosenbrock() -> TargetModel:
    """theta_1 ~ N(0,1), theta_2 | theta_1 ~ N(0.03(theta_1 - 100), 1).

    The conditional mean ties the second coordinate to a shifted, scaled
    copy of the first, giving slowly mixing chains for most samplers.
    Both marginal moments are exact: E = (0, -3), Var = (1, 1.0009).
    """

    def log_density(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        t1 = theta[..., 0]
        resid = theta[..., 1] - 0.03 * (t1 - 100.0)
        return -0.5 * t1 * t1 - 0.5 * resid * resid - LOG_2PI

    def gradient(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        t1 = theta[..., 0]
        resid = theta[..., 1] - 0.03 * (t1 - 100.0)
        grad = np.empty_like(theta)
        grad[..., 0] = -t1 + 0.03 * resid
        grad[..., 1] = -resid
        return grad

    moments = BenchmarkMoments(
        mean=np.array([0.0, -3.0]),
        variance=np.array([1.0, 1.0 + 0.03**2]),
        provenance="analytic",
    )
    return TargetModel("rosenbrock", 2, log_density, gradient, moments)


def gaussian_mixture(dim: int = 100) -> TargetModel:
    """0.3 N(-5*1, I) + 0.7 N(+5*1, I) in `dim` dimensions.

    The modes sit 10*sqrt(dim) apart so gradient-based chains never cross;
    per-dimension mean is 2 and variance 22 regardless of dim.
    """
    if dim < 1:
        raise InvalidParameterError(f"dim must be >= 1, got {dim}")
    mode = np.full(dim, MIXTURE_MODE)
    log_w = np.log(np.array([MIXTURE_WEIGHT_LOW, MIXTURE_WEIGHT_HIGH]))

    def _component_logs(theta: np.ndarray) -> np.ndarray:
        # stacked component log densities, shape (2, ...)
        lo = -0.5 * np.sum((theta + mode) ** 2, axis=-1)
        hi = -0.5 * np.sum((theta - mode) ** 2, axis=-1)
        base = -0.5 * dim * LOG_2PI
        return np.stack([log_w[0] + base + lo, log_w[1] + base + hi])

    def log_density(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        comp = _component_logs(theta)
        top = comp.max(axis=0)
        return top + np.log(np.exp(comp - top).sum(axis=0))

    def gradient(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        comp = _component_logs(theta)
        top = comp.max(axis=0)
        weights = np.exp(comp - top)
        weights /= weights.sum(axis=0)
        r_lo = weights[0][..., None]
        return -r_lo * (theta + mode) - (1.0 - r_lo) * (theta - mode)

    # mean = 0.7*5 - 0.3*5 = 2; var = 1 + E[m^2] - mean^2 = 1 + 25 - 4 = 22
    mean = MIXTURE_WEIGHT_HIGH * MIXTURE_MODE - MIXTURE_WEIGHT_LOW * MIXTURE_MODE
    var = 1.0 + MIXTURE_MODE**2 - mean**2
    moments = BenchmarkMoments(
        mean=np.full(dim, mean),
        variance=np.full(dim, var),
        provenance="analytic",
    )
    return TargetModel("mixture", dim, log_density, gradient, moments)
