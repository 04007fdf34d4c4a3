"""Flat key=value run configurations and the packaged per-target tunings.

A run plan is expressible as a small text file:

    target = rosenbrock
    kind = hmc
    step_size = 0.25
    leapfrog = 8
    K = 4
    M = 128
    N = 1
    warmup = 200
    seed = 20250811
    init.mu0 = 0
    init.sigma0 = 2

The package ships one such file per bundled target (``configs/<target>.cfg``)
holding step sizes that sit safely inside the leapfrog stability region
measured for that posterior.  CLI flags override file values; unknown keys
are rejected rather than ignored.

``init.preset = anchored`` replaces the scalar init center with the
target-specific anchor used by the benchmark oracle (needed for the
pharmacokinetic model, whose log-scale parameters cannot start at zero).
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .chain_store import SuperchainLayout
from .errors import ConfigurationError, IngestionError
from .samplers import InitDistribution, RunPlan, SamplerConfig

_KNOWN_KEYS = {
    "target": str,
    "kind": str,
    "step_size": float,
    "leapfrog": int,
    "K": int,
    "M": int,
    "N": int,
    "warmup": int,
    "seed": int,
    "init.mu0": float,
    "init.sigma0": float,
    "init.preset": str,
}

_REQUIRED_KEYS = ("target", "step_size", "K", "M", "N")


def parse_flat_config(text: str, source: str = "<config>") -> dict[str, str]:
    """key = value lines; blank lines and # comments allowed; duplicates rejected."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise IngestionError(f"{source}: line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise IngestionError(f"{source}: line {lineno}: empty key or value")
        if key in values:
            raise IngestionError(f"{source}: line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def validate_keys(values: dict[str, str], source: str = "<config>") -> None:
    unknown = sorted(set(values) - set(_KNOWN_KEYS))
    if unknown:
        raise ConfigurationError(
            f"{source}: unknown keys {', '.join(unknown)}; "
            f"valid keys are {', '.join(sorted(_KNOWN_KEYS))}"
        )


def packaged_config(target_name: str) -> dict[str, str]:
    """The shipped tuning for a bundled target."""
    ref = resources.files("superchains") / "configs" / f"{target_name}.cfg"
    if not ref.is_file():
        raise ConfigurationError(f"no packaged config for target {target_name!r}")
    values = parse_flat_config(ref.read_text(), source=f"configs/{target_name}.cfg")
    validate_keys(values, source=f"configs/{target_name}.cfg")
    return values


@dataclass(frozen=True)
class RunSettings:
    """A fully resolved run: plan ingredients plus the target name."""

    target: str
    kind: str
    step_size: float
    leapfrog: int
    num_superchains: int
    num_subchains: int
    num_draws: int
    warmup: int
    seed: int
    init_mu0: np.ndarray
    init_sigma0: float


def _coerce(key: str, raw: str, source: str):
    kind = _KNOWN_KEYS[key]
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigurationError(f"{source}: {key} must be {kind.__name__}, got {raw!r}") from None


def resolve_settings(values: dict[str, str], source: str = "<config>") -> RunSettings:
    """Validate, type, and default a flat config into RunSettings."""
    validate_keys(values, source)
    missing = [k for k in _REQUIRED_KEYS if k not in values]
    if missing:
        raise ConfigurationError(f"{source}: missing required keys {', '.join(missing)}")
    typed = {k: _coerce(k, v, source) for k, v in values.items()}

    target = typed["target"]
    preset = typed.get("init.preset")
    if preset is None:
        mu0 = np.atleast_1d(np.float64(typed.get("init.mu0", 0.0)))
    elif preset == "anchored":
        from .targets import get_target
        from .targets.benchmarks import _init_center

        mu0 = _init_center(target, get_target(target).dim)
    else:
        raise ConfigurationError(f"{source}: unknown init.preset {preset!r} (only 'anchored')")

    return RunSettings(
        target=target,
        kind=typed.get("kind", "hmc"),
        step_size=typed["step_size"],
        leapfrog=typed.get("leapfrog", 1),
        num_superchains=typed["K"],
        num_subchains=typed["M"],
        num_draws=typed["N"],
        warmup=typed.get("warmup", 0),
        seed=typed.get("seed", 0),
        init_mu0=mu0,
        init_sigma0=typed.get("init.sigma0", 1.0),
    )


def settings_for_target(target_name: str, overrides: dict[str, str] | None = None) -> RunSettings:
    """Packaged tuning for a target, with optional flat-key overrides."""
    values = packaged_config(target_name)
    if overrides:
        validate_keys(overrides, source="<overrides>")
        values.update(overrides)
    values["target"] = target_name
    return resolve_settings(values, source=f"configs/{target_name}.cfg")


def build_plan(settings: RunSettings, dim: int) -> RunPlan:
    layout = SuperchainLayout(
        num_superchains=settings.num_superchains,
        num_subchains=settings.num_subchains,
        num_draws=settings.num_draws,
        dim=dim,
        warmup=settings.warmup,
        seed=settings.seed,
    )
    config = SamplerConfig(
        kind=settings.kind,
        step_size=settings.step_size,
        leapfrog_steps=settings.leapfrog if settings.kind != "mala" else 1,
    )
    init = InitDistribution.gaussian(settings.init_mu0, settings.init_sigma0)
    return RunPlan(layout=layout, config=config, init=init)
