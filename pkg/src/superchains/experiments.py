"""Empirical studies tying the nested diagnostic to estimator error.

Three study families:

* error sweeps: run many short chains with increasing warmup budgets and
  record, per dimension, the nested diagnostic next to the scaled squared
  error of the pooled mean, so threshold crossings can be compared with
  actual estimator quality;
* estimator-variance studies: how the spread of the between/within ratio
  depends on the superchain count K, the warmup phase, and the number of
  kept draws N;
* reliability grids: empirical (delta, delta')-reliability of the nested
  diagnostic over initialization means and variances, checked against the
  diffusion-limit bound for the Gaussian target.

Warmup budgets within one replication share a single trajectory: because
chain randomness is a pure function of (seed, chain, iteration), the state
recorded at checkpoint ell is bit-identical to a fresh run with warmup ell.
Replications are independently seeded, so their order is irrelevant; this
implementation runs them sequentially and vectorizes across chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import rng
from .chain_store import ChainDraws, SuperchainLayout, build_draws
from .diagnostics import ThresholdPolicy, nested_rhat
from .errors import (
    ConfigurationError,
    DataError,
    DegenerateVarianceError,
    InvalidParameterError,
    ShapeError,
)
from .langevin_oracle import (
    LangevinSpec,
    Reliability,
    ReliabilityQuery,
    reliability_sigma0_bound,
)
from .numerics import compensated_mean, compensated_variance
from .samplers import ChainEngine, InitDistribution, SamplerConfig
from .special import chi2_quantile
from .targets import BenchmarkMoments, benchmark_moments, get_target
from .tuning import settings_for_target

DEFAULT_WARMUP_GRID = tuple(range(10, 101, 10)) + tuple(range(200, 1001, 100))

# Checkpoints continue one trajectory per replication instead of restarting.
WARMUP_CONTINUATION = True


def scaled_squared_error(draws: ChainDraws, benchmark: BenchmarkMoments) -> np.ndarray:
    """Squared error of the pooled mean, scaled to a unit chi-square.

    E^2_d = C (mean_d - ref_mean_d)^2 / ref_var_d with C the total number of
    draws.  At N = 1 this is the exact K*M scaling; for N > 1 the count
    extends to K*M*N, which treats kept draws as independent and is only
    approximate for autocorrelated chains.
    """
    if benchmark is None:
        raise ConfigurationError("scaled squared error needs reference moments for the target")
    k, m, n, d = draws.layout.shape
    ref_mean = np.asarray(benchmark.mean, dtype=np.float64)
    ref_var = np.asarray(benchmark.variance, dtype=np.float64)
    if ref_mean.shape != (d,) or ref_var.shape != (d,):
        raise ShapeError(
            f"benchmark moments have shape {ref_mean.shape}, draws have dimension {d}"
        )
    if not np.all(np.isfinite(ref_var)) or np.any(ref_var <= 0):
        raise DataError("benchmark variances must be finite and positive")
    pooled = compensated_mean(draws.values.reshape(k * m * n, d), axis=0)
    return k * m * n * (pooled - ref_mean) ** 2 / ref_var


@dataclass(frozen=True)
class SweepPlan:
    """One error sweep: a target, a warmup grid, and a chain layout.

    Sampler settings come from the packaged tuning for the target;
    config_overrides patches individual keys (step_size, leapfrog, kind,
    init.mu0, ...).  The layout fields here win over any K/M/N in the file.
    """

    target: str
    warmup_lengths: tuple[int, ...] = DEFAULT_WARMUP_GRID
    num_superchains: int = 16
    num_subchains: int = 32
    num_draws: int = 1
    replications: int = 10
    seed: int = 0
    config_overrides: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if self.num_superchains < 2:
            raise InvalidParameterError(f"sweep needs >= 2 superchains, got {self.num_superchains}")
        if self.num_subchains < 1 or self.num_draws < 1:
            raise InvalidParameterError("subchain and draw counts must be >= 1")
        if self.num_subchains == 1 and self.num_draws == 1:
            raise InvalidParameterError("nested diagnostic needs M > 1 or N > 1")
        if self.replications < 1:
            raise InvalidParameterError(f"replications must be >= 1, got {self.replications}")
        lengths = self.warmup_lengths
        if not lengths:
            raise InvalidParameterError("warmup grid must be non-empty")
        if any(l < 0 for l in lengths):
            raise InvalidParameterError("warmup lengths must be >= 0")
        gaps_ok = all(b - a >= self.num_draws for a, b in zip(lengths, lengths[1:]))
        if not gaps_ok:
            raise InvalidParameterError(
                "warmup lengths must increase by at least num_draws so checkpoints do not overlap"
            )


@dataclass(frozen=True)
class ErrorRecord:
    """One (warmup, replication, dimension) cell of a sweep."""

    target: str
    dim: int
    warmup: int
    replication: int
    nested_rhat: float
    squared_error: float
    threshold: float
    diverged: bool = False


def run_sweep(plan: SweepPlan, benchmarks_dir=None) -> list[ErrorRecord]:
    """Record the nested diagnostic and E^2 at every warmup checkpoint.

    Each replication advances one set of chains through the warmup grid; at
    checkpoint ell the chains take num_draws further recorded transitions,
    exactly reproducing a fresh run with warmup ell.  A replication whose
    chains include one that never accepted a proposal is flagged diverged
    (as are checkpoints where the nested diagnostic degenerates) and the
    sweep continues.  Returns exactly L*R*D records, sorted by
    (warmup, replication, dim).
    """
    target = get_target(plan.target)
    reference = benchmark_moments(target, benchmarks_dir=benchmarks_dir)
    settings = settings_for_target(plan.target, dict(plan.config_overrides))
    config = SamplerConfig(
        kind=settings.kind,
        step_size=settings.step_size,
        leapfrog_steps=settings.leapfrog if settings.kind != "mala" else 1,
    )
    init = InitDistribution.gaussian(settings.init_mu0, settings.init_sigma0)
    k, m, n, d = plan.num_superchains, plan.num_subchains, plan.num_draws, target.dim
    alarm = ThresholdPolicy(num_subchains=m).value()

    records: list[ErrorRecord] = []
    for rep in range(plan.replications):
        layout = SuperchainLayout(k, m, n, d, warmup=0, seed=plan.seed + rep)
        engine = ChainEngine(target, config, layout, init)
        consumed = 0
        for ell in plan.warmup_lengths:
            engine.advance(ell - consumed)
            states = np.empty((k * m, n, d))
            for i in range(n):
                engine.advance(1)
                states[:, i, :] = engine.positions
            consumed = ell + n
            checkpoint_layout = SuperchainLayout(k, m, n, d, warmup=ell, seed=layout.seed)
            draws = build_draws(checkpoint_layout, states.reshape(k, m, n, d))
            diverged = bool((engine.accepts == 0).any())
            try:
                nrhat = nested_rhat(draws).nested_rhat
            except DegenerateVarianceError:
                nrhat = np.full(d, np.nan)
                diverged = True
            e2 = scaled_squared_error(draws, reference)
            for dim in range(d):
                records.append(
                    ErrorRecord(
                        target=plan.target,
                        dim=dim,
                        warmup=ell,
                        replication=rep,
                        nested_rhat=float(nrhat[dim]),
                        squared_error=float(e2[dim]),
                        threshold=alarm,
                        diverged=diverged,
                    )
                )
    records.sort(key=lambda r: (r.warmup, r.replication, r.dim))
    return records


@dataclass(frozen=True)
class FractionPoint:
    """Conditional exceedance fraction at one diagnostic cutoff."""

    epsilon: float
    fraction: float
    count: int


def fraction_above_quantile(
    records: Sequence[ErrorRecord],
    epsilons: Sequence[float],
    min_support: int = 100,
) -> list[FractionPoint]:
    """Fraction of E^2 above the chi-square(1) 0.95 quantile among records
    whose nested diagnostic is at most 1 + epsilon.

    Calibrated runs give fractions near 0.05.  Cutoffs with fewer than
    min_support qualifying records are omitted rather than reported noisily;
    epsilon = inf admits every non-diverged record.
    """
    if not records:
        raise DataError("fraction curve needs at least one record")
    quantile = chi2_quantile(0.95, df=1.0)
    values = np.array(
        [(r.nested_rhat, r.squared_error) for r in records if not r.diverged],
        dtype=np.float64,
    ).reshape(-1, 2)
    points: list[FractionPoint] = []
    for eps in epsilons:
        if not eps >= 0:
            raise InvalidParameterError(f"epsilon must be >= 0, got {eps}")
        mask = values[:, 0] <= 1.0 + eps
        count = int(mask.sum())
        if count < min_support:
            continue
        fraction = float(np.mean(values[mask, 1] > quantile))
        points.append(FractionPoint(epsilon=float(eps), fraction=fraction, count=count))
    return points


@dataclass(frozen=True)
class RatioVarianceRecord:
    """Spread of the between/within ratio for one grouping choice."""

    num_superchains: int
    num_subchains: int
    warmup: int
    num_draws: int
    variance: float
    mean_ratio: float
    replications: int
    independent_inits: bool


def ratio_variance_study(
    target: str = "gaussian",
    total_chains: int = 2048,
    k_values: Sequence[int] = (2, 8, 32, 128, 512),
    warmup_grid: Sequence[int] = (0,),
    num_draws_values: Sequence[int] = (1,),
    replications: int = 200,
    seed: int = 0,
    sampler: str = "exact",
    phi: float = 0.0,
    init_mu0: float = 0.0,
    init_sigma0: float = 1.0,
    independent_inits: bool = False,
    config_overrides: dict[str, str] | None = None,
) -> list[RatioVarianceRecord]:
    """Empirical variance of the nested between/within ratio across groupings.

    For each K in k_values (each must divide total_chains), each kept-draw
    count N, and each warmup length, runs `replications` independent sets of
    total_chains chains grouped into K superchains and reports the variance
    of nested_b_hat/nested_w_hat (first dimension) across replications.

    sampler = "exact" uses the closed-form AR(1) kernel with lag-one
    correlation phi and a N(init_mu0, init_sigma0^2) start, so stationarity
    is available exactly (Gaussian target only).  sampler = "config" runs
    the packaged tuning for any registered target.  independent_inits draws
    a separate initialization per chain instead of per superchain, the
    grouping a plain pooled diagnostic would see.
    """
    if replications < 2:
        raise InvalidParameterError(
            f"ratio variance needs >= 2 replications, got {replications}"
        )
    if sampler not in ("exact", "config"):
        raise InvalidParameterError(f"sampler must be 'exact' or 'config', got {sampler!r}")
    if sampler == "exact" and target != "gaussian":
        raise InvalidParameterError("the exact kernel is defined for the gaussian target only")
    for k in k_values:
        if k < 2 or total_chains % k != 0:
            raise InvalidParameterError(
                f"each K must be >= 2 and divide total_chains={total_chains}, got {k}"
            )
    warmups = tuple(warmup_grid)
    if not warmups or any(w < 0 for w in warmups) or list(warmups) != sorted(set(warmups)):
        raise InvalidParameterError("warmup grid must be non-empty, non-negative, increasing")

    records: list[RatioVarianceRecord] = []
    for k in k_values:
        m = total_chains // k
        for n in num_draws_values:
            if n < 1:
                raise InvalidParameterError(f"num_draws must be >= 1, got {n}")
            if m == 1 and n == 1:
                raise InvalidParameterError(
                    f"K={k} leaves one chain per superchain and one draw; the ratio is undefined"
                )
            if any(b - a < n for a, b in zip(warmups, warmups[1:])):
                raise InvalidParameterError(
                    f"warmup gaps must be >= num_draws={n} so checkpoints do not overlap"
                )
            ratios = np.empty((len(warmups), replications))
            for rep in range(replications):
                by_checkpoint = _ratio_trajectory(
                    target, k, m, n, warmups, seed + rep, sampler, phi,
                    init_mu0, init_sigma0, independent_inits, config_overrides,
                )
                ratios[:, rep] = by_checkpoint
            for w_idx, warmup in enumerate(warmups):
                row = ratios[w_idx]
                records.append(
                    RatioVarianceRecord(
                        num_superchains=k,
                        num_subchains=m,
                        warmup=warmup,
                        num_draws=n,
                        variance=float(compensated_variance(row, axis=0, ddof=1)),
                        mean_ratio=float(compensated_mean(row, axis=0)),
                        replications=replications,
                        independent_inits=independent_inits,
                    )
                )
    records.sort(key=lambda r: (r.num_superchains, r.warmup, r.num_draws))
    return records


def _ratio_trajectory(
    target_name, k, m, n, warmups, seed, sampler, phi,
    init_mu0, init_sigma0, independent_inits, config_overrides,
) -> np.ndarray:
    """One replication: between/within ratio (dim 0) at each warmup checkpoint."""
    # Independent inits run as total_chains single-chain superchains, then
    # the states are regrouped; draws differ from the shared-init stream but
    # the comparison is distributional, not pathwise.
    if sampler == "exact":
        target_dim = 1
    else:
        target = get_target(target_name)
        target_dim = target.dim
    if independent_inits:
        layout = SuperchainLayout(k * m, 1, n, target_dim, warmup=0, seed=seed)
    else:
        layout = SuperchainLayout(k, m, n, target_dim, warmup=0, seed=seed)

    if sampler == "exact":
        init = InitDistribution.gaussian(np.atleast_1d(init_mu0), init_sigma0)
        stepper = _ExactAr1(phi, 1.0, layout, init)
    else:
        settings = settings_for_target(target_name, dict(config_overrides or {}))
        config = SamplerConfig(
            kind=settings.kind,
            step_size=settings.step_size,
            leapfrog_steps=settings.leapfrog if settings.kind != "mala" else 1,
        )
        init = InitDistribution.gaussian(settings.init_mu0, settings.init_sigma0)
        stepper = ChainEngine(target, config, layout, init)

    out = np.empty(len(warmups))
    consumed = 0
    for idx, ell in enumerate(warmups):
        stepper.advance(ell - consumed)
        states = np.empty((k * m, n, target_dim))
        for i in range(n):
            stepper.advance(1)
            states[:, i, :] = stepper.positions
        consumed = ell + n
        grouped = SuperchainLayout(k, m, n, target_dim, warmup=ell, seed=seed)
        draws = build_draws(grouped, states.reshape(k, m, n, target_dim))
        parts = nested_rhat(draws)
        out[idx] = parts.nested_b_hat[0] / parts.nested_w_hat[0]
    return out


class _ExactAr1:
    """Minimal engine-shaped wrapper around the closed-form AR(1) kernel."""

    def __init__(self, phi: float, sigma: float, layout: SuperchainLayout, init: InitDistribution):
        if not -1.0 < phi < 1.0:
            raise InvalidParameterError(f"phi must be in (-1, 1), got {phi}")
        k, m = layout.num_superchains, layout.num_subchains
        linear = np.arange(k * m)
        self.keys = rng.chain_key(layout.seed, linear // m, linear % m, purpose=rng.PURPOSE_STEP)
        self.positions = init.draw(layout)[linear // m].astype(np.float64, copy=True)
        self.dim = layout.dim
        self.phi = phi
        self.scale = math.sqrt(1.0 - phi * phi) * sigma
        self.iteration = 0

    def advance(self, num_steps: int) -> None:
        for _ in range(num_steps):
            noise = rng.iteration_normals(self.keys, self.iteration, self.dim)
            self.positions = self.phi * self.positions + self.scale * noise
            self.iteration += 1


RELIABLE = "reliable"
UNRELIABLE = "unreliable"


@dataclass(frozen=True)
class ReliabilityPoint:
    """Empirical and theoretical verdicts at one initialization."""

    mu0: float
    sigma0_sq: float
    empirical: str
    theoretical: str | None = None
    sigma0_sq_bound: float | None = None


def reliability_study(
    kind: str,
    mu0_values: Sequence[float],
    sigma0_sq_values: Sequence[float],
    num_subchains: int = 16,
    num_superchains: int = 1024,
    delta: float = 0.1,
    delta_prime: float = 0.02,
    step_size: float = 0.04,
    num_steps: int = 20000,
    checkpoint_every: int = 25,
    seed: int = 0,
) -> list[ReliabilityPoint]:
    """Empirical (delta, delta')-reliability over an initialization grid.

    Chains run MALA from N(mu0, sigma0^2) and are checked every
    checkpoint_every iterations.  For the gaussian kind a grid point is
    empirically unreliable if some checkpoint has between/within ratio
    <= delta while the squared pooled bias still exceeds delta' * sigma^2;
    the verdict is compared against the diffusion-limit variance bound
    (MALA with step eps tracks the diffusion at time eps^2/2 per
    iteration).  For the mixture kind the chains never mix between modes,
    so the diagnostic is reliable iff it stays at or above sqrt(1 + delta)
    at every checkpoint; no closed-form boundary applies.
    """
    if kind not in ("gaussian", "mixture"):
        raise InvalidParameterError(f"kind must be 'gaussian' or 'mixture', got {kind!r}")
    if delta <= 0 or delta_prime <= 0:
        raise InvalidParameterError("delta and delta_prime must be positive")
    if num_steps < checkpoint_every or checkpoint_every < 1:
        raise InvalidParameterError("need at least one checkpoint")
    target = get_target(kind, dim=1) if kind == "gaussian" else get_target("mixture", dim=1)
    config = SamplerConfig(kind="mala", step_size=step_size, leapfrog_steps=1)
    k, m = num_superchains, num_subchains
    checkpoints = range(checkpoint_every, num_steps + 1, checkpoint_every)
    alarm_sq = 1.0 + delta

    points: list[ReliabilityPoint] = []
    for mu0 in mu0_values:
        for sigma0_sq in sigma0_sq_values:
            if sigma0_sq < 0:
                raise InvalidParameterError(f"sigma0^2 must be >= 0, got {sigma0_sq}")
            layout = SuperchainLayout(k, m, 1, 1, warmup=0, seed=seed)
            init = InitDistribution.gaussian(np.atleast_1d(mu0), math.sqrt(sigma0_sq))
            engine = ChainEngine(target, config, layout, init)
            empirical = RELIABLE
            done = 0
            for step in checkpoints:
                engine.advance(step - done)
                done = step
                states = engine.positions.reshape(k, m, 1, 1)
                grouped = SuperchainLayout(k, m, 1, 1, warmup=step, seed=seed)
                try:
                    parts = nested_rhat(build_draws(grouped, states))
                except DegenerateVarianceError:
                    continue
                if kind == "mixture":
                    if parts.nested_rhat[0] ** 2 < alarm_sq:
                        empirical = UNRELIABLE
                        break
                    continue
                ratio = parts.nested_b_hat[0] / parts.nested_w_hat[0]
                if ratio <= delta:
                    bias_sq = float(compensated_mean(states.reshape(-1, 1), axis=0)[0]) ** 2
                    if bias_sq > delta_prime:
                        empirical = UNRELIABLE
                        break
            if kind == "gaussian":
                spec = LangevinSpec(
                    mu=0.0, sigma=1.0, mu0=mu0, sigma0=math.sqrt(sigma0_sq),
                    T=1.0, M=num_subchains,
                )
                result = reliability_sigma0_bound(spec, ReliabilityQuery(delta, delta_prime))
                if result.verdict in (Reliability.TRIVIAL, Reliability.ALWAYS):
                    theoretical = RELIABLE
                    bound = result.sigma0_sq_bound
                else:
                    bound = result.sigma0_sq_bound
                    theoretical = RELIABLE if sigma0_sq >= bound else UNRELIABLE
                points.append(
                    ReliabilityPoint(
                        mu0=float(mu0),
                        sigma0_sq=float(sigma0_sq),
                        empirical=empirical,
                        theoretical=theoretical,
                        sigma0_sq_bound=bound,
                    )
                )
            else:
                points.append(
                    ReliabilityPoint(mu0=float(mu0), sigma0_sq=float(sigma0_sq), empirical=empirical)
                )
    return points


def median_by_warmup(records: Sequence[ErrorRecord]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-warmup medians of the diagnostic and of E^2, diverged records excluded."""
    clean = [r for r in records if not r.diverged and np.isfinite(r.nested_rhat)]
    if not clean:
        raise DataError("no usable records; every checkpoint diverged")
    warmups = sorted({r.warmup for r in clean})
    med_rhat = np.empty(len(warmups))
    med_e2 = np.empty(len(warmups))
    for i, w in enumerate(warmups):
        rows = [(r.nested_rhat, r.squared_error) for r in clean if r.warmup == w]
        arr = np.asarray(rows)
        med_rhat[i] = np.median(arr[:, 0])
        med_e2[i] = np.median(arr[:, 1])
    return np.asarray(warmups, dtype=np.int64), med_rhat, med_e2


def spearman_correlation(x: Sequence[float], y: Sequence[float]) -> float:
    """Rank correlation with average ranks on ties."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise InvalidParameterError("rank correlation needs two equal-length vectors of size >= 2")
    rx, ry = _average_ranks(x), _average_ranks(y)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0:
        raise DataError("rank correlation undefined: a vector is constant")
    return float(rx @ ry) / denom


def _average_ranks(v: np.ndarray) -> np.ndarray:
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(v.size, dtype=np.float64)
    i = 0
    sorted_v = v[order]
    while i < v.size:
        j = i
        while j + 1 < v.size and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j)
        i = j + 1
    return ranks


def write_sweep_csv(records: Sequence[ErrorRecord], path) -> None:
    """Columns: target,dim,warmup,rep,nRhat,E2,threshold (diverged rows keep NaN)."""
    lines = ["target,dim,warmup,rep,nRhat,E2,threshold"]
    for r in records:
        lines.append(
            f"{r.target},{r.dim},{r.warmup},{r.replication},"
            f"{r.nested_rhat!r},{r.squared_error!r},{r.threshold!r}"
        )
    _write_text(path, lines)


def write_fraction_csv(points: Sequence[FractionPoint], path) -> None:
    """Columns: epsilon,fraction,count."""
    lines = ["epsilon,fraction,count"]
    for p in points:
        lines.append(f"{p.epsilon!r},{p.fraction!r},{p.count}")
    _write_text(path, lines)


def write_ratio_variance_csv(records: Sequence[RatioVarianceRecord], path) -> None:
    """Columns: K,warmup,N,variance."""
    lines = ["K,warmup,N,variance"]
    for r in records:
        lines.append(f"{r.num_superchains},{r.warmup},{r.num_draws},{r.variance!r}")
    _write_text(path, lines)


def write_reliability_csv(points: Sequence[ReliabilityPoint], path) -> None:
    """Columns: mu0,sigma0_sq,empirical,theoretical,sigma0_sq_bound."""
    lines = ["mu0,sigma0_sq,empirical,theoretical,sigma0_sq_bound"]
    for p in points:
        theo = p.theoretical if p.theoretical is not None else ""
        bound = "" if p.sigma0_sq_bound is None else repr(p.sigma0_sq_bound)
        lines.append(f"{p.mu0!r},{p.sigma0_sq!r},{p.empirical},{theo},{bound}")
    _write_text(path, lines)


def _write_text(path, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
