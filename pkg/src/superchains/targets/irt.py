"""One-parameter logistic item-response model.

400 student abilities alpha, 100 question difficulties beta, and a shared
offset delta; response j,l is Bernoulli(logit^-1(alpha_j - beta_l + delta)).
Parameters (D = 501) are ordered [delta, alpha_1..alpha_400, beta_1..beta_100]
with priors delta ~ N(0.75, 1), alpha ~ N(0, I), beta ~ N(0, I).
"""

from __future__ import annotations

import csv
from importlib import resources

import numpy as np

from ..errors import ConfigurationError, DataError
from .base import LOG_2PI, TargetModel, sigmoid

DATA_FILE = "irt_sim.csv"
NUM_STUDENTS = 400
NUM_QUESTIONS = 100
DELTA_PRIOR_MEAN = 0.75


def load_irt_data(path=None) -> np.ndarray:
    """Binary response matrix shaped (students, questions)."""
    if path is None:
        ref = resources.files("superchains.targets") / "data" / DATA_FILE
        if not ref.is_file():
            raise ConfigurationError(f"packaged data file {DATA_FILE} is missing")
        lines = ref.read_text().splitlines()
        source = DATA_FILE
    else:
        try:
            with open(path) as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise ConfigurationError(f"cannot read irt data: {exc}") from None
        source = str(path)
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["student", "question", "response"]:
        raise DataError(f"{source}: expected header student,question,response")
    y = np.full((NUM_STUDENTS, NUM_QUESTIONS), -1, dtype=np.int8)
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            j, l, r = int(row[0]), int(row[1]), int(row[2])
        except (ValueError, IndexError) as exc:
            raise DataError(f"{source}: line {lineno}: {exc}") from None
        if not (0 <= j < NUM_STUDENTS and 0 <= l < NUM_QUESTIONS):
            raise DataError(f"{source}: line {lineno}: index out of range")
        if r not in (0, 1):
            raise DataError(f"{source}: line {lineno}: response must be 0 or 1")
        if y[j, l] != -1:
            raise DataError(f"{source}: line {lineno}: duplicate response ({j},{l})")
        y[j, l] = r
    if (y == -1).any():
        raise DataError(f"{source}: incomplete response matrix")
    return y.astype(np.float64)


def item_response(data_path=None) -> TargetModel:
    y = load_irt_data(data_path)
    dim = 1 + NUM_STUDENTS + NUM_QUESTIONS

    def log_density(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        delta = theta[..., 0]
        alpha = theta[..., 1 : 1 + NUM_STUDENTS]
        beta = theta[..., 1 + NUM_STUDENTS :]
        logits = delta[..., None, None] + alpha[..., :, None] - beta[..., None, :]
        # y*x - softplus(x) summed over the response matrix
        ll = y * logits - (np.maximum(logits, 0.0) + np.log1p(np.exp(-np.abs(logits))))
        lp = -0.5 * (delta - DELTA_PRIOR_MEAN) ** 2 - 0.5 * LOG_2PI
        lp = lp - 0.5 * np.sum(alpha * alpha, axis=-1) - 0.5 * np.sum(beta * beta, axis=-1)
        lp = lp - 0.5 * (NUM_STUDENTS + NUM_QUESTIONS) * LOG_2PI
        return lp + np.sum(ll, axis=(-2, -1))

    def gradient(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        delta = theta[..., 0]
        alpha = theta[..., 1 : 1 + NUM_STUDENTS]
        beta = theta[..., 1 + NUM_STUDENTS :]
        logits = delta[..., None, None] + alpha[..., :, None] - beta[..., None, :]
        score = y - sigmoid(logits)
        grad = np.empty_like(theta)
        grad[..., 0] = -(delta - DELTA_PRIOR_MEAN) + np.sum(score, axis=(-2, -1))
        grad[..., 1 : 1 + NUM_STUDENTS] = -alpha + np.sum(score, axis=-1)
        grad[..., 1 + NUM_STUDENTS :] = -beta - np.sum(score, axis=-2)
        return grad

    return TargetModel("item_response", dim, log_density, gradient, None)
