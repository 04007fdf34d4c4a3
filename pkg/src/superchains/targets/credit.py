"""Bayesian logistic regression on a numeric credit-scoring table.

Rows are 24 integer covariates followed by a label in {1, 2} (good/bad),
whitespace separated, as in the classic numeric credit dataset.  Covariates
are standardized and an intercept column appended, giving D = 25 weights
with independent N(0, 1) priors.  A synthetic table drawn from the same
model ships with the package for offline use.
"""

from __future__ import annotations

import os
from importlib import resources

import numpy as np

from ..errors import ConfigurationError, DataError
from .base import TargetModel, sigmoid

SYNTHETIC_FILE = "german_synthetic.data-numeric"
NUM_FEATURES = 24


def load_credit_design(path=None) -> tuple[np.ndarray, np.ndarray]:
    """Standardized design matrix (n, 25) with intercept, and labels in {0, 1}."""
    if path is None:
        ref = resources.files("superchains.targets") / "data" / SYNTHETIC_FILE
        if not ref.is_file():
            raise ConfigurationError(f"packaged data file {SYNTHETIC_FILE} is missing")
        text = ref.read_text()
        source = SYNTHETIC_FILE
    else:
        if not os.path.exists(path):
            raise ConfigurationError(
                f"credit data file {path} not found; omit the path to use the bundled synthetic table ({SYNTHETIC_FILE})"
            )
        with open(path) as fh:
            text = fh.read()
        source = str(path)
    try:
        table = np.loadtxt(text.splitlines())
    except ValueError as exc:
        raise DataError(f"{source}: {exc}") from None
    if table.ndim != 2 or table.shape[1] != NUM_FEATURES + 1:
        raise DataError(
            f"{source}: expected {NUM_FEATURES} features + label per row, got shape {table.shape}"
        )
    raw = table[:, :NUM_FEATURES]
    labels = table[:, NUM_FEATURES]
    if not np.isin(labels, (1.0, 2.0)).all():
        raise DataError(f"{source}: labels must be 1 or 2")
    y = (labels == 2.0).astype(np.float64)
    sd = raw.std(axis=0, ddof=0)
    if (sd == 0).any():
        raise DataError(f"{source}: constant covariate column {int(np.flatnonzero(sd == 0)[0])}")
    design = np.empty((table.shape[0], NUM_FEATURES + 1))
    design[:, :NUM_FEATURES] = (raw - raw.mean(axis=0)) / sd
    design[:, NUM_FEATURES] = 1.0
    return design, y


def german_credit(data_path=None) -> TargetModel:
    x, y = load_credit_design(data_path)
    dim = x.shape[1]

    def log_density(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        logits = theta @ x.T
        # y*logit - softplus(logit), softplus evaluated stably
        ll = y * logits - (np.maximum(logits, 0.0) + np.log1p(np.exp(-np.abs(logits))))
        return -0.5 * np.sum(theta * theta, axis=-1) + np.sum(ll, axis=-1)

    def gradient(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        p = sigmoid(theta @ x.T)
        return -theta + (y - p) @ x

    return TargetModel("german_credit", dim, log_density, gradient, None)
