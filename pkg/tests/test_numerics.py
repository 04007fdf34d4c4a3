"""Compensated reducers against exact-rational and stdlib references."""

import math
from fractions import Fraction

import numpy as np
import pytest

from superchains.numerics import (
    RunningMoments,
    compensated_mean,
    compensated_sum,
    compensated_variance,
)


def test_sum_survives_cancellation():
    a = np.array([1e16, 1.0, -1e16, 1.0])
    assert compensated_sum(a) == 2.0


def test_sum_matches_fsum_on_mixed_scales():
    r = np.random.default_rng(0)
    a = r.normal(scale=[1e-8, 1.0, 1e8], size=(257, 3))
    got = compensated_sum(a, axis=0)
    want = np.array([math.fsum(a[:, j]) for j in range(3)])
    np.testing.assert_allclose(got, want, rtol=1e-15, atol=0.0)


def test_variance_matches_exact_rational():
    vals = [0.1, 0.7, -1.3, 2.9, 0.4, -0.6]
    exact_mean = sum(Fraction(v) for v in vals) / len(vals)
    exact_var = sum((Fraction(v) - exact_mean) ** 2 for v in vals) / (len(vals) - 1)
    got = float(compensated_variance(np.array(vals)))
    assert math.isclose(got, float(exact_var), rel_tol=1e-14)


def test_variance_with_large_offset():
    base = np.array([0.0, 1.0, 2.0, 3.0])
    np.testing.assert_allclose(
        compensated_variance(base + 1e9), compensated_variance(base), rtol=1e-12
    )


def test_variance_needs_enough_values():
    with pytest.raises(ValueError):
        compensated_variance(np.array([1.0]), ddof=1)


def test_axis_handling():
    a = np.arange(24, dtype=float).reshape(2, 3, 4)
    np.testing.assert_allclose(compensated_sum(a, axis=1), a.sum(axis=1), rtol=1e-15)
    np.testing.assert_allclose(compensated_mean(a, axis=2), a.mean(axis=2), rtol=1e-15)
    np.testing.assert_allclose(
        compensated_variance(a, axis=0, ddof=1), a.var(axis=0, ddof=1), rtol=1e-13
    )


def test_reduction_is_deterministic():
    r = np.random.default_rng(8)
    a = r.normal(size=(1000,))
    assert compensated_sum(a) == compensated_sum(a.copy())


def test_running_moments_match_two_pass():
    r = np.random.default_rng(3)
    data = r.normal(loc=5.0, size=(100, 4))
    acc = RunningMoments((4,))
    for start in range(0, 100, 7):
        acc.update(data[start : start + 7])
    assert acc.count == 100
    np.testing.assert_allclose(acc.mean, compensated_mean(data, axis=0), rtol=1e-13)
    np.testing.assert_allclose(acc.variance(), compensated_variance(data, axis=0), rtol=1e-12)


def test_running_moments_merge():
    r = np.random.default_rng(4)
    data = r.normal(size=(60, 2))
    left, right = RunningMoments((2,)), RunningMoments((2,))
    left.update(data[:25])
    right.update(data[25:])
    left.merge(right)
    assert left.count == 60
    np.testing.assert_allclose(left.mean, compensated_mean(data, axis=0), rtol=1e-13)
    np.testing.assert_allclose(left.variance(), compensated_variance(data, axis=0), rtol=1e-12)


def test_running_moments_guards():
    acc = RunningMoments((3,))
    with pytest.raises(ValueError):
        acc.update(np.zeros((5, 2)))
    with pytest.raises(ValueError):
        RunningMoments((2,)).variance()
    acc.update(np.zeros((0, 3)))  # empty batches are a no-op
    assert acc.count == 0
