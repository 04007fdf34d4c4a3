"""Many short MCMC chains with a nested convergence diagnostic.

Submodules load lazily: the CLI sets thread-cap environment variables
before numpy initializes its BLAS pools, which only works if importing
this package stays free of heavy imports.
"""

from __future__ import annotations

from importlib import import_module

__version__ = "0.1.0"

_SUBMODULES = (
    "chain_store",
    "cli",
    "diagnostics",
    "errors",
    "experiments",
    "langevin_oracle",
    "numerics",
    "rng",
    "samplers",
    "special",
    "targets",
    "tuning",
)

# headline names -> home submodule
_ATTR_HOME = {
    "SuperchainLayout": "chain_store",
    "ChainDraws": "chain_store",
    "build_draws": "chain_store",
    "summarize": "chain_store",
    "rhat": "diagnostics",
    "nested_rhat": "diagnostics",
    "nested_rhat_sampled_mean": "diagnostics",
    "ThresholdPolicy": "diagnostics",
    "threshold": "diagnostics",
    "build_report": "diagnostics",
    "ar1_chain_law": "diagnostics",
    "bw_limits_from_chain_law": "diagnostics",
    "nested_limits_from_superchain_law": "diagnostics",
    "SamplerConfig": "samplers",
    "InitDistribution": "samplers",
    "RunPlan": "samplers",
    "RunResult": "samplers",
    "ChainEngine": "samplers",
    "run": "samplers",
    "exact_gaussian_chain": "samplers",
    "get_target": "targets",
    "benchmark_moments": "targets",
    "REGISTRY": "targets",
    "LangevinSpec": "langevin_oracle",
    "ReliabilityQuery": "langevin_oracle",
    "nested_ratio": "langevin_oracle",
    "nested_limits": "langevin_oracle",
    "reliability_sigma0_bound": "langevin_oracle",
    "SweepPlan": "experiments",
    "run_sweep": "experiments",
    "scaled_squared_error": "experiments",
    "fraction_above_quantile": "experiments",
    "ratio_variance_study": "experiments",
    "reliability_study": "experiments",
    "SuperchainError": "errors",
}


def __getattr__(name: str):
    if name in _SUBMODULES:
        return import_module(f".{name}", __name__)
    home = _ATTR_HOME.get(name)
    if home is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    return getattr(import_module(f".{home}", __name__), name)


def __dir__():
    return sorted([*_SUBMODULES, *_ATTR_HOME, "__version__"])
