"""Convergence diagnostics for flat and superchain-grouped runs.

The flat estimator compares between-chain to within-chain variance with the
adjusted (divisor N-1) within term, so the ratio never drops below 1 by
construction.  The nested estimator replaces the within term with the total
variance inside each superchain, which stays informative with a single kept
draw per subchain; its stationary value is 1/M rather than 0, so thresholds
are phrased as sqrt(1 + 1/M + tau).

Closed-form limits for Gaussian chain laws are provided alongside the
estimators so tests can pin every estimator against an exact value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .chain_store import ChainDraws, SuperchainLayout
from .errors import (
    DegenerateVarianceError,
    InsufficientDrawsError,
    InsufficientSuperchainsError,
    InvalidLawError,
    InvalidParameterError,
)
from .numerics import compensated_mean, compensated_sum, compensated_variance

__all__ = [
    "RhatComponents",
    "NestedRhatComponents",
    "ThresholdPolicy",
    "ChainLaw",
    "DiagnosticReport",
    "rhat",
    "nested_rhat",
    "nested_rhat_sampled_mean",
    "threshold",
    "ess1_from_ratio",
    "ar1_chain_law",
    "bw_limits_from_chain_law",
    "nested_limits_from_superchain_law",
    "build_report",
]


@dataclass(frozen=True)
class RhatComponents:
    """Per-dimension pieces of the flat diagnostic.

    b_hat: variance of chain means (divisor C-1).
    w_hat: mean within-chain variance (divisor N-1).
    rhat:  sqrt(1 + b_hat/w_hat), always >= 1.
    """

    b_hat: np.ndarray
    w_hat: np.ndarray
    rhat: np.ndarray


@dataclass(frozen=True)
class NestedRhatComponents:
    """Per-dimension pieces of the nested diagnostic.

    nested_b_hat: variance of superchain means (divisor K-1).
    nested_w_hat: mean over superchains of (between-subchain variance +
        mean within-subchain variance), the case splits vanishing at M = 1
        or N = 1 respectively.
    nested_rhat:  sqrt(1 + nested_b_hat/nested_w_hat).
    """

    nested_b_hat: np.ndarray
    nested_w_hat: np.ndarray
    nested_rhat: np.ndarray


@dataclass(frozen=True)
class ThresholdPolicy:
    """Decision threshold sqrt(1 + 1/M + tau) for the nested diagnostic.

    tau is the slack above the stationary value of the squared diagnostic;
    1/M is the floor contributed by persistent initialization variance.
    """

    num_subchains: int
    tau: float = 1e-4

    def __post_init__(self) -> None:
        if self.num_subchains < 1:
            raise InvalidParameterError(f"num_subchains must be >= 1, got {self.num_subchains}")
        if not np.isfinite(self.tau) or self.tau < 0:
            raise InvalidParameterError(f"tau must be finite and >= 0, got {self.tau}")

    def value(self) -> float:
        return float(np.sqrt(1.0 + 1.0 / self.num_subchains + self.tau))


def threshold(policy: ThresholdPolicy) -> float:
    """Numeric threshold for a policy (monotone: down in M, up in tau)."""
    return policy.value()


def rhat(draws: ChainDraws) -> RhatComponents:
    """Flat diagnostic over all K*M chains, superchain grouping ignored.

    Requires at least two chains and at least two draws per chain.  A
    dimension whose within-chain variance vanishes (all chains frozen at
    one value) raises DegenerateVarianceError rather than returning inf.
    """
    flat = draws.flat_chains()
    n_chains, n_draws, _ = flat.shape
    if n_chains < 2:
        raise InsufficientSuperchainsError(f"flat diagnostic needs >= 2 chains, got {n_chains}")
    if n_draws < 2:
        raise InsufficientDrawsError(f"flat diagnostic needs >= 2 draws per chain, got {n_draws}")
    chain_mean = compensated_mean(flat, axis=1)
    within = compensated_variance(flat, axis=1, ddof=1)
    w_hat = compensated_mean(within, axis=0)
    b_hat = compensated_variance(chain_mean, axis=0, ddof=1)
    _check_positive(w_hat, "within-chain")
    return RhatComponents(b_hat=b_hat, w_hat=w_hat, rhat=np.sqrt(1.0 + b_hat / w_hat))


def nested_rhat(draws: ChainDraws) -> NestedRhatComponents:
    """Superchain diagnostic; exact with a single kept draw per subchain.

    With M = 1 this reduces to the flat estimator on K chains (the
    between-subchain term vanishes and the within term is the ordinary
    within-chain variance).
    """
    k, m, n, _ = draws.layout.shape
    if k < 2:
        raise InsufficientSuperchainsError(f"nested diagnostic needs >= 2 superchains, got {k}")
    if m == 1 and n == 1:
        raise InsufficientDrawsError("nested diagnostic needs M > 1 or N > 1; layout has one draw per superchain")
    x = draws.values
    subchain_mean = compensated_mean(x, axis=2)
    superchain_mean = compensated_mean(subchain_mean, axis=1)
    if m > 1:
        between_sub = compensated_variance(subchain_mean, axis=1, ddof=1)
    else:
        between_sub = np.zeros_like(superchain_mean)
    if n > 1:
        within_sub = compensated_mean(compensated_variance(x, axis=2, ddof=1), axis=1)
    else:
        within_sub = np.zeros_like(superchain_mean)
    nested_w = compensated_mean(between_sub + within_sub, axis=0)
    nested_b = compensated_variance(superchain_mean, axis=0, ddof=1)
    _check_positive(nested_w, "within-superchain")
    return NestedRhatComponents(
        nested_b_hat=nested_b,
        nested_w_hat=nested_w,
        nested_rhat=np.sqrt(1.0 + nested_b / nested_w),
    )


def nested_rhat_sampled_mean(draws: ChainDraws) -> np.ndarray:
    """Unweighted mean over sampling iterations of single-draw nested values.

    Each iteration n is treated as its own N = 1 tensor; averaging the
    resulting diagnostics damps estimator noise without mixing iterations
    into the superchain means.  Requires M >= 2.
    """
    k, m, n, d = draws.layout.shape
    if m < 2:
        raise InsufficientDrawsError(f"sampled nested diagnostic needs M >= 2 subchains, got {m}")
    slice_layout = SuperchainLayout(k, m, 1, d, warmup=draws.layout.warmup, seed=draws.layout.seed)
    per_iter = np.empty((n, d), dtype=np.float64)
    for i in range(n):
        view = ChainDraws(layout=slice_layout, values=draws.values[:, :, i : i + 1, :])
        per_iter[i] = nested_rhat(view).nested_rhat
    return compensated_mean(per_iter, axis=0)


def ess1_from_ratio(components: RhatComponents) -> np.ndarray:
    """Per-dimension single-draw effective sample size estimate W/B.

    A zero between-chain variance means chain means are indistinguishable;
    that dimension returns inf rather than raising.
    """
    b = np.asarray(components.b_hat, dtype=np.float64)
    w = np.asarray(components.w_hat, dtype=np.float64)
    out = np.full(b.shape, np.inf)
    nz = b > 0
    out[nz] = w[nz] / b[nz]
    return out


def _check_positive(w: np.ndarray, label: str) -> None:
    bad = np.flatnonzero(~(w > 0))
    if bad.size:
        raise DegenerateVarianceError(f"{label} variance is zero in dimension {int(bad[0])}")


# ---------------------------------------------------------------------------
# closed-form limits for Gaussian chain laws


@dataclass(frozen=True)
class ChainLaw:
    """Gaussian law of one chain's kept draws: mean vector and covariance.

    mean has shape (N,), covariance (N, N).  The covariance must be
    symmetric and positive semidefinite (tolerance 1e-10 on eigenvalues).
    """

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        if mean.ndim != 1:
            raise InvalidLawError(f"mean must be a vector, got shape {mean.shape}")
        n = mean.shape[0]
        if cov.shape != (n, n):
            raise InvalidLawError(f"covariance shape {cov.shape} does not match mean length {n}")
        if not (np.isfinite(mean).all() and np.isfinite(cov).all()):
            raise InvalidLawError("chain law contains non-finite entries")
        scale = max(1.0, float(np.abs(cov).max()))
        if np.abs(cov - cov.T).max() > 1e-12 * scale:
            raise InvalidLawError("covariance is not symmetric")
        eigs = np.linalg.eigvalsh(cov)
        if eigs.min() < -1e-10 * scale:
            raise InvalidLawError(f"covariance is not PSD (min eigenvalue {eigs.min():g})")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def num_draws(self) -> int:
        return self.mean.shape[0]


def ar1_chain_law(phi: float, sigma: float, num_draws: int, stationary_mean: float = 0.0) -> ChainLaw:
    """Stationary AR(1) law: Cov(x_i, x_j) = sigma^2 phi^|i-j|."""
    if not -1.0 < phi < 1.0:
        raise InvalidParameterError(f"AR(1) coefficient must be in (-1, 1), got {phi}")
    if sigma <= 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    if num_draws < 1:
        raise InvalidParameterError(f"num_draws must be >= 1, got {num_draws}")
    idx = np.arange(num_draws)
    cov = sigma**2 * np.power(float(phi), np.abs(idx[:, None] - idx[None, :]))
    return ChainLaw(mean=np.full(num_draws, float(stationary_mean)), covariance=cov)


def bw_limits_from_chain_law(law: ChainLaw) -> tuple[float, float]:
    """Exact many-chain limits (B, W) of the flat estimator under a law.

    B is the variance of the chain average; W carries a variance part
    (within-draw variance minus the average's variance) and a drift part
    (dispersion of the mean trajectory), each divided by N-1.
    """
    n = law.num_draws
    if n < 2:
        raise InsufficientDrawsError(f"flat limits need N >= 2 draws, got {n}")
    cov_total = float(compensated_sum(compensated_sum(law.covariance, axis=0), axis=0))
    b = cov_total / n**2
    mu = law.mean
    mu_bar = float(compensated_mean(mu, axis=0))
    variance_part = float(compensated_sum(np.diag(law.covariance), axis=0)) - n * b
    drift_part = float(compensated_sum((mu - mu_bar) ** 2, axis=0))
    w = (variance_part + drift_part) / (n - 1)
    return b, w


def nested_limits_from_superchain_law(
    nonstationary_variance: float,
    persistent_variance: float,
    num_subchains: int,
    num_draws: int,
    chain_law: ChainLaw | None = None,
) -> tuple[float, float]:
    """Exact many-superchain limits (nB, nW) from initialization variances.

    nonstationary_variance is the variance across initializations of the
    conditional subchain-average expectation; persistent_variance is the
    expected conditional variance of the subchain average.  Their sum is the
    marginal variance of a subchain average, i.e. the flat B of the marginal
    chain law.  At N > 1 the within-subchain term W' is the flat W of that
    marginal law, supplied via chain_law; at N = 1 it vanishes.
    """
    if num_subchains < 1:
        raise InvalidParameterError(f"num_subchains must be >= 1, got {num_subchains}")
    if num_draws < 1:
        raise InvalidParameterError(f"num_draws must be >= 1, got {num_draws}")
    for name, value in (
        ("nonstationary_variance", nonstationary_variance),
        ("persistent_variance", persistent_variance),
    ):
        if not np.isfinite(value) or value < 0:
            raise InvalidLawError(f"{name} must be finite and >= 0, got {value}")
    nested_b = nonstationary_variance + persistent_variance / num_subchains
    if num_draws == 1:
        w_prime = 0.0
    else:
        if chain_law is None:
            raise InvalidParameterError("N > 1 limits need the marginal chain_law for the within term")
        if chain_law.num_draws != num_draws:
            raise InvalidLawError(
                f"chain_law describes {chain_law.num_draws} draws, layout has {num_draws}"
            )
        _, w_prime = bw_limits_from_chain_law(chain_law)
    nested_w = persistent_variance + w_prime
    return float(nested_b), float(nested_w)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class DiagnosticReport:
    """Per-dimension nested diagnostic against a threshold policy."""

    layout: SuperchainLayout
    components: NestedRhatComponents
    threshold: float
    passed: np.ndarray

    @property
    def all_passed(self) -> bool:
        return bool(self.passed.all())

    def to_csv(self, path) -> None:
        c = self.components
        with open(path, "w", newline="") as fh:
            fh.write("dim,nB,nW,nRhat,threshold,pass\n")
            for d in range(self.layout.dim):
                fh.write(
                    f"{d},{float(c.nested_b_hat[d])!r},{float(c.nested_w_hat[d])!r},"
                    f"{float(c.nested_rhat[d])!r},{float(self.threshold)!r},{str(bool(self.passed[d])).lower()}\n"
                )

    def to_json(self, path) -> None:
        c = self.components
        payload = {
            "layout": {
                "num_superchains": self.layout.num_superchains,
                "num_subchains": self.layout.num_subchains,
                "num_draws": self.layout.num_draws,
                "dim": self.layout.dim,
                "warmup": self.layout.warmup,
                "seed": self.layout.seed,
            },
            "nested_b_hat": c.nested_b_hat.tolist(),
            "nested_w_hat": c.nested_w_hat.tolist(),
            "nested_rhat": c.nested_rhat.tolist(),
            "threshold": self.threshold,
            "pass": [bool(v) for v in self.passed],
            "all_passed": self.all_passed,
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


def build_report(draws: ChainDraws, tau: float = 1e-4) -> DiagnosticReport:
    """Nested diagnostic for a draw tensor under threshold(tau, M)."""
    policy = ThresholdPolicy(num_subchains=draws.layout.num_subchains, tau=tau)
    comps = nested_rhat(draws)
    thr = policy.value()
    return DiagnosticReport(
        layout=draws.layout,
        components=comps,
        threshold=thr,
        passed=comps.nested_rhat <= thr,
    )
