"""Gradient-based samplers run as superchains.

All K*M chains advance together as one vectorized state array.  Each chain's
randomness comes from its own counter-based stream keyed by (root seed, k, m),
and superchain k's shared initial point from a stream keyed by (root seed, k),
so any subset of chains can be re-run in isolation and reproduce exactly the
draws it produced inside the full run.

The proposal kernels are Metropolis-adjusted Langevin (MALA) and static-
trajectory HMC with identity mass matrix and full momentum refresh.  MALA's
proposal is one leapfrog step; its acceptance ratio is computed from the
forward/reverse Gaussian proposal densities, which agrees with the
Hamiltonian accept ratio of single-step HMC (the two kernels are the same
algorithm written differently, and the tests hold them to that).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import rng
from .chain_store import ChainDraws, SuperchainLayout, build_draws
from .errors import (
    InitializationError,
    InvalidParameterError,
)
from .targets.base import TargetModel

__all__ = [
    "SamplerConfig",
    "InitDistribution",
    "RunPlan",
    "RunResult",
    "ChainEngine",
    "run",
    "exact_gaussian_chain",
]


@dataclass(frozen=True)
class SamplerConfig:
    """Kernel choice and tuning.

    kind: "mala" or "hmc".  MALA is definitionally single-step, so
    leapfrog_steps must be 1 for it.
    """

    kind: str
    step_size: float
    leapfrog_steps: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("mala", "hmc"):
            raise InvalidParameterError(f"kind must be 'mala' or 'hmc', got {self.kind!r}")
        if not np.isfinite(self.step_size) or self.step_size <= 0:
            raise InvalidParameterError(f"step_size must be positive, got {self.step_size}")
        if self.leapfrog_steps < 1:
            raise InvalidParameterError(f"leapfrog_steps must be >= 1, got {self.leapfrog_steps}")
        if self.kind == "mala" and self.leapfrog_steps != 1:
            raise InvalidParameterError("mala is a single-step kernel; use kind='hmc' for longer trajectories")


@dataclass(frozen=True)
class InitDistribution:
    """How superchain initial points are drawn.

    Exactly one of three modes: an isotropic Gaussian (mu0, sigma0), an explicit
    (K, D) array of points, or a hook mapping superchain index to a point.
    sigma0 = 0 degenerates to a point mass at mu0.
    """

    mu0: np.ndarray | None = None
    sigma0: np.ndarray | None = None
    points: np.ndarray | None = None
    hook: Callable[[int], np.ndarray] | None = None

    @staticmethod
    def gaussian(mu0, sigma0) -> "InitDistribution":
        mu0 = np.atleast_1d(np.asarray(mu0, dtype=np.float64))
        sigma0 = np.atleast_1d(np.asarray(sigma0, dtype=np.float64))
        if not np.isfinite(mu0).all() or not np.isfinite(sigma0).all():
            raise InvalidParameterError("init mu0/sigma0 must be finite")
        if (sigma0 < 0).any():
            raise InvalidParameterError("init sigma0 must be >= 0")
        return InitDistribution(mu0=mu0, sigma0=sigma0)

    @staticmethod
    def from_points(points) -> "InitDistribution":
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2:
            raise InvalidParameterError(f"init points must be (K, D), got shape {points.shape}")
        if not np.isfinite(points).all():
            raise InvalidParameterError("init points must be finite")
        return InitDistribution(points=points)

    @staticmethod
    def from_hook(hook: Callable[[int], np.ndarray]) -> "InitDistribution":
        return InitDistribution(hook=hook)

    def draw(self, layout: SuperchainLayout) -> np.ndarray:
        """One initial point per superchain, shape (K, D)."""
        k, _, _, d = layout.shape
        if self.points is not None:
            if self.points.shape != (k, d):
                raise InvalidParameterError(
                    f"init points shape {self.points.shape} does not match layout (K={k}, D={d})"
                )
            return self.points.copy()
        if self.hook is not None:
            out = np.empty((k, d))
            for i in range(k):
                point = np.asarray(self.hook(i), dtype=np.float64)
                if point.shape != (d,) or not np.isfinite(point).all():
                    raise InitializationError(f"init hook returned a bad point for superchain {i}")
                out[i] = point
            return out
        if self.mu0 is None or self.sigma0 is None:
            raise InvalidParameterError("init distribution is empty; use gaussian/from_points/from_hook")
        mu0 = np.broadcast_to(self.mu0, (d,))
        sigma0 = np.broadcast_to(self.sigma0, (d,))
        keys = rng.chain_key(layout.seed, np.arange(k), 0, purpose=rng.PURPOSE_INIT)
        noise = rng.normals(keys, 0, d)
        return mu0 + sigma0 * noise


@dataclass(frozen=True)
class RunPlan:
    """Everything that determines a run: layout, kernel, initialization."""

    layout: SuperchainLayout
    config: SamplerConfig
    init: InitDistribution


@dataclass
class RunResult:
    draws: ChainDraws
    warmup_accept_rate: np.ndarray  # (K, M), NaN when warmup = 0
    sampling_accept_rate: np.ndarray  # (K, M)
    warnings: list[str] = field(default_factory=list)

    @property
    def accept_rate(self) -> np.ndarray:
        """Acceptance over all transitions, warmup included."""
        layout = self.draws.layout
        w, n = layout.warmup, layout.num_draws
        warm = np.nan_to_num(self.warmup_accept_rate, nan=0.0) * w
        return (warm + self.sampling_accept_rate * n) / (w + n)


class ChainEngine:
    """Vectorized transition engine over a set of chains.

    `chains` selects a subset of linear chain indices (k*M + m); draws for a
    subset are bit-identical to the corresponding slice of a full run.  The
    engine exposes its state so callers can interleave advancing with
    checkpoint statistics without storing draws.
    """

    def __init__(
        self,
        target: TargetModel,
        config: SamplerConfig,
        layout: SuperchainLayout,
        init: InitDistribution,
        chains: Sequence[int] | None = None,
    ):
        if target.dim != layout.dim:
            raise InvalidParameterError(
                f"target dimension {target.dim} does not match layout dimension {layout.dim}"
            )
        self.target = target
        self.config = config
        self.layout = layout
        k, m = layout.num_superchains, layout.num_subchains
        if chains is None:
            linear = np.arange(k * m)
        else:
            linear = np.asarray(list(chains), dtype=np.int64)
            if linear.size == 0 or (linear < 0).any() or (linear >= k * m).any():
                raise InvalidParameterError(f"chain indices must lie in [0, {k * m})")
        self.chain_indices = linear
        k_idx, m_idx = linear // m, linear % m
        self.keys = rng.chain_key(layout.seed, k_idx, m_idx, purpose=rng.PURPOSE_STEP)
        start = init.draw(layout)  # (K, D); subset rows picked per chain
        self.positions = start[k_idx].astype(np.float64, copy=True)
        self.log_prob = np.asarray(target.log_density(self.positions), dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(self.log_prob))
        if bad.size:
            raise InitializationError(
                f"log density not finite at the initial point of chain (k={k_idx[bad[0]]}, m={m_idx[bad[0]]})"
            )
        self.gradients = np.asarray(target.gradient(self.positions), dtype=np.float64)
        self.iteration = 0
        self.accepts = np.zeros(linear.shape[0], dtype=np.int64)

    def advance(self, num_steps: int) -> None:
        step = self._mala_step if self.config.kind == "mala" else self._hmc_step
        for _ in range(num_steps):
            step()

    def _propose_leapfrog(self, momentum: np.ndarray):
        """Shared leapfrog integration; returns proposal, its logp/grad, and
        the final momentum."""
        eps = self.config.step_size
        x = self.positions
        p = momentum + 0.5 * eps * self.gradients
        for leg in range(self.config.leapfrog_steps):
            x = x + eps * p
            g = np.asarray(self.target.gradient(x), dtype=np.float64)
            if leg + 1 < self.config.leapfrog_steps:
                p = p + eps * g
        p = p + 0.5 * eps * g
        lp = np.asarray(self.target.log_density(x), dtype=np.float64)
        return x, lp, g, p

    def _hmc_step(self) -> None:
        dim = self.layout.dim
        p0 = rng.iteration_normals(self.keys, self.iteration, dim)
        u = rng.iteration_uniform(self.keys, self.iteration, dim)
        x1, lp1, g1, p1 = self._propose_leapfrog(p0)
        delta = lp1 - self.log_prob - 0.5 * np.sum(p1 * p1, axis=-1) + 0.5 * np.sum(p0 * p0, axis=-1)
        self._metropolis(x1, lp1, g1, delta, u)

    def _mala_step(self) -> None:
        dim = self.layout.dim
        eps = self.config.step_size
        noise = rng.iteration_normals(self.keys, self.iteration, dim)
        u = rng.iteration_uniform(self.keys, self.iteration, dim)
        x1, lp1, g1, _ = self._propose_leapfrog(noise)
        # reverse-move noise implied by proposing x0 from x1
        rev = (self.positions - x1 - 0.5 * eps * eps * g1) / eps
        delta = (lp1 - 0.5 * np.sum(rev * rev, axis=-1)) - (
            self.log_prob - 0.5 * np.sum(noise * noise, axis=-1)
        )
        self._metropolis(x1, lp1, g1, delta, u)

    def _metropolis(self, x1, lp1, g1, delta, u) -> None:
        delta = np.where(np.isfinite(lp1), delta, -np.inf)
        accept = np.log(u) < delta
        self.positions = np.where(accept[:, None], x1, self.positions)
        self.log_prob = np.where(accept, lp1, self.log_prob)
        self.gradients = np.where(accept[:, None], g1, self.gradients)
        self.accepts += accept
        self.iteration += 1


def run(plan: RunPlan, target: TargetModel, chains: Sequence[int] | None = None) -> RunResult:
    """Execute a plan and collect the kept draws.

    Draws are the chain states after each post-warmup transition; warmup
    states are never stored.  `chains` restricts execution to a subset of
    linear chain indices (the returned tensor still has the full layout,
    with unrun chains at NaN, so subset reproducibility can be checked
    slice-for-slice) -- omit it for normal use.
    """
    layout = plan.layout
    k, m, n, d = layout.shape
    engine = ChainEngine(target, plan.config, layout, plan.init, chains=chains)
    engine.advance(layout.warmup)
    warmup_accepts = engine.accepts.copy()
    sampled = np.empty((engine.chain_indices.size, n, d))
    for i in range(n):
        engine.advance(1)
        sampled[:, i, :] = engine.positions
    sampling_accepts = engine.accepts - warmup_accepts

    warm_rate = np.full(k * m, np.nan)
    samp_rate = np.full(k * m, np.nan)
    if layout.warmup > 0:
        warm_rate[engine.chain_indices] = warmup_accepts / layout.warmup
    samp_rate[engine.chain_indices] = sampling_accepts / n

    warnings: list[str] = []
    if layout.warmup > 0:
        frozen = int((warmup_accepts == 0).sum())
        if frozen:
            warnings.append(
                f"divergence: {frozen} of {engine.chain_indices.size} chains accepted no proposals during warmup"
            )

    if chains is None:
        values = sampled.reshape(k, m, n, d)
        result_draws = build_draws(layout, values)
    else:
        values = np.full((k * m, n, d), np.nan)
        values[engine.chain_indices] = sampled
        # bypass finiteness validation: unrun chains are deliberately NaN
        result_draws = ChainDraws(layout=layout, values=values.reshape(k, m, n, d))
    return RunResult(
        draws=result_draws,
        warmup_accept_rate=warm_rate.reshape(k, m),
        sampling_accept_rate=samp_rate.reshape(k, m),
        warnings=warnings,
    )


def exact_gaussian_chain(
    phi: float,
    sigma: float,
    layout: SuperchainLayout,
    init: InitDistribution,
) -> ChainDraws:
    """Exact AR(1) reference chains: x' = phi x + sqrt(1 - phi^2) sigma xi.

    The stationary marginal is N(0, sigma^2) in every dimension and the lag-t
    autocorrelation is phi^t, so every diagnostic applied to these draws has
    a closed-form limit.  Streams and init semantics match `run` exactly.
    """
    if not -1.0 < phi < 1.0:
        raise InvalidParameterError(f"phi must be in (-1, 1), got {phi}")
    if not np.isfinite(sigma) or sigma <= 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    k, m, n, d = layout.shape
    linear = np.arange(k * m)
    k_idx, m_idx = linear // m, linear % m
    keys = rng.chain_key(layout.seed, k_idx, m_idx, purpose=rng.PURPOSE_STEP)
    x = init.draw(layout)[k_idx].astype(np.float64, copy=True)
    scale = np.sqrt(1.0 - phi * phi) * sigma
    values = np.empty((k * m, n, d))
    for t in range(layout.warmup + n):
        x = phi * x + scale * rng.iteration_normals(keys, t, d)
        if t >= layout.warmup:
            values[:, t - layout.warmup, :] = x
    return build_draws(layout, values.reshape(k, m, n, d))
