"""Order-fixed, compensated reductions shared by every estimator.

Summation order is part of the determinism contract: identical input tensors
must produce bit-identical summaries.  All moment math therefore funnels
through the compensated (Neumaier) reducers below, which walk the reduction
axis in index order with an explicit error term, or through `RunningMoments`
for streaming use where draws are never materialized.
"""

from __future__ import annotations

import numpy as np


def compensated_sum(a: np.ndarray, axis: int = 0) -> np.ndarray:
    """Neumaier-compensated sum along one axis, fixed index order."""
    a = np.asarray(a, dtype=np.float64)
    a = np.moveaxis(a, axis, 0)
    total = a[0].astype(np.float64, copy=True)
    comp = np.zeros_like(total)
    for i in range(1, a.shape[0]):
        x = a[i]
        t = total + x
        comp += np.where(np.abs(total) >= np.abs(x), (total - t) + x, (x - t) + total)
        total = t
    return total + comp


def compensated_mean(a: np.ndarray, axis: int = 0) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    return compensated_sum(a, axis=axis) / a.shape[axis]


def compensated_variance(a: np.ndarray, axis: int = 0, ddof: int = 1) -> np.ndarray:
    """Two-pass compensated variance (divisor n - ddof)."""
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[axis]
    if n - ddof <= 0:
        raise ValueError(f"variance needs more than {ddof} values along axis, got {n}")
    m = compensated_mean(a, axis=axis)
    dev = a - np.expand_dims(m, axis)
    return compensated_sum(dev * dev, axis=axis) / (n - ddof)


class RunningMoments:
    """Streaming per-slot mean and variance (Welford, batched updates).

    Accepts batches shaped (batch, *shape) and merges them with the parallel
    combine rule, so feeding one iteration's draws at a time never loses
    precision to a naive sum of squares.
    """

    def __init__(self, shape: tuple[int, ...]):
        self.count = 0
        self.mean = np.zeros(shape, dtype=np.float64)
        self._m2 = np.zeros(shape, dtype=np.float64)

    def update(self, batch: np.ndarray) -> None:
        batch = np.asarray(batch, dtype=np.float64)
        if batch.shape[1:] != self.mean.shape:
            raise ValueError(
                f"batch shape {batch.shape[1:]} != accumulator shape {self.mean.shape}"
            )
        n_b = batch.shape[0]
        if n_b == 0:
            return
        mean_b = compensated_mean(batch, axis=0)
        dev = batch - mean_b
        m2_b = compensated_sum(dev * dev, axis=0)
        self._combine(n_b, mean_b, m2_b)

    def merge(self, other: "RunningMoments") -> None:
        self._combine(other.count, other.mean, other._m2)

    def _combine(self, n_b: int, mean_b: np.ndarray, m2_b: np.ndarray) -> None:
        if n_b == 0:
            return
        n_a = self.count
        n = n_a + n_b
        delta = mean_b - self.mean
        self.mean = self.mean + delta * (n_b / n)
        self._m2 = self._m2 + m2_b + delta * delta * (n_a * n_b / n)
        self.count = n

    def variance(self, ddof: int = 1) -> np.ndarray:
        if self.count - ddof <= 0:
            raise ValueError(f"need more than {ddof} observations, have {self.count}")
        return self._m2 / (self.count - ddof)
