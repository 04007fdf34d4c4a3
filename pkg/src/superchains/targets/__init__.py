"""Posterior families with hand-derived gradients and reference moments."""

from __future__ import annotations

from ..errors import InvalidParameterError
from .base import BenchmarkMoments, TargetModel, finite_difference_gradient
from .benchmarks import compute_benchmark, load_benchmark, save_benchmark
from .credit import german_credit
from .irt import item_response
from .pharma import mass_profiles, pharmacokinetics
from .schools import eight_schools
from .simple import gaussian, gaussian_mixture, rosenbrock

REGISTRY = {
    "gaussian": gaussian,
    "rosenbrock": rosenbrock,
    "mixture": gaussian_mixture,
    "eight_schools": eight_schools,
    "german_credit": german_credit,
    "pharmacokinetics": pharmacokinetics,
    "item_response": item_response,
}


def get_target(name: str, **kwargs) -> TargetModel:
    """Instantiate a registered target by name."""
    if name not in REGISTRY:
        known = ", ".join(sorted(REGISTRY))
        raise InvalidParameterError(f"unknown target {name!r}; registered targets: {known}")
    return REGISTRY[name](**kwargs)


def benchmark_moments(target: TargetModel, benchmarks_dir=None) -> BenchmarkMoments:
    """Reference moments: analytic when the family has them, otherwise the
    cached long-run oracle values (MissingBenchmarkError if never computed)."""
    if target.analytic_moments is not None:
        return target.analytic_moments
    return load_benchmark(target.name, directory=benchmarks_dir)


__all__ = [
    "BenchmarkMoments",
    "TargetModel",
    "REGISTRY",
    "get_target",
    "benchmark_moments",
    "finite_difference_gradient",
    "compute_benchmark",
    "load_benchmark",
    "save_benchmark",
    "gaussian",
    "rosenbrock",
    "gaussian_mixture",
    "eight_schools",
    "german_credit",
    "pharmacokinetics",
    "item_response",
    "mass_profiles",
]
