"""Hierarchical normal means model (eight schools), non-centered.

Parameters (D = 10): [mu, log sigma, eta_1..eta_8] with
    mu ~ N(5, 3), sigma ~ half-N(0, 10), eta_n ~ N(0, 1),
    y_n ~ N(mu + eta_n sigma, s_n).
The group scale is sampled on the log scale; its Jacobian term is included.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from ..errors import ConfigurationError
from .base import LOG_2PI, TargetModel, normal_logpdf

DATA_FILE = "eight_schools.json"


def load_school_data(path=None) -> tuple[np.ndarray, np.ndarray]:
    """Treatment effects and their standard errors, from the packaged file
    unless an explicit path is given."""
    if path is None:
        ref = resources.files("superchains.targets") / "data" / DATA_FILE
        if not ref.is_file():
            raise ConfigurationError(f"packaged data file {DATA_FILE} is missing")
        raw = json.loads(ref.read_text())
    else:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read school data: {exc}") from None
    y = np.asarray(raw["y"], dtype=np.float64)
    sd = np.asarray(raw["sigma"], dtype=np.float64)
    if y.shape != sd.shape or y.ndim != 1:
        raise ConfigurationError(f"school data must be two equal-length vectors, got {y.shape} / {sd.shape}")
    if (sd <= 0).any():
        raise ConfigurationError("school standard errors must be positive")
    return y, sd


def eight_schools(data_path=None, include_likelihood: bool = True) -> TargetModel:
    """Non-centered posterior; include_likelihood=False gives the prior only
    (used to check that the mu marginal recovers its prior mean)."""
    y, s = load_school_data(data_path)
    n_groups = y.shape[0]
    dim = 2 + n_groups
    inv_s2 = 1.0 / s**2

    def log_density(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        mu = theta[..., 0]
        log_sigma = theta[..., 1]
        eta = theta[..., 2:]
        sigma = np.exp(log_sigma)
        lp = normal_logpdf(mu, 5.0, 3.0)
        # half-normal scale prior plus the log-scale Jacobian
        lp = lp + np.log(2.0) + normal_logpdf(sigma, 0.0, 10.0) + log_sigma
        lp = lp + np.sum(-0.5 * eta * eta - 0.5 * LOG_2PI, axis=-1)
        if include_likelihood:
            effects = mu[..., None] + eta * sigma[..., None]
            lp = lp + np.sum(normal_logpdf(y, effects, s), axis=-1)
        return lp

    def gradient(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        mu = theta[..., 0]
        log_sigma = theta[..., 1]
        eta = theta[..., 2:]
        sigma = np.exp(log_sigma)
        grad = np.empty_like(theta)
        grad[..., 0] = -(mu - 5.0) / 9.0
        grad[..., 1] = -(sigma**2) / 100.0 + 1.0
        grad[..., 2:] = -eta
        if include_likelihood:
            resid = (y - mu[..., None] - eta * sigma[..., None]) * inv_s2
            grad[..., 0] += np.sum(resid, axis=-1)
            grad[..., 1] += np.sum(resid * eta, axis=-1) * sigma
            grad[..., 2:] += resid * sigma[..., None]
        return grad

    name = "eight_schools" if include_likelihood else "eight_schools_prior"
    return TargetModel(name, dim, log_density, gradient, None)
