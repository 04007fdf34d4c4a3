"""Closed-form convergence quantities for the Langevin diffusion.

For the SDE dX_t = -(X_t - mu) dt + sqrt(2) sigma dW_t targeting N(mu, sigma^2),
with chains initialized from N(mu0, sigma0^2), everything the nested diagnostic
measures has a closed form.  Two observation models are covered:

  * each chain reports its state at time T (the nested-R-hat setting, N = 1);
  * each chain reports its time average over (0, T] (the classic-R-hat
    setting), where the shape functions rho_T, xi_T, eta_T appear.

These formulas are the oracle the sampled diagnostics are validated against,
and they answer reliability queries: how much initial overdispersion sigma0
is needed so the diagnostic cannot pass while the bias is still above the
tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AssumptionViolationError,
    DegenerateRegimeError,
    InvalidParameterError,
)

__all__ = [
    "LangevinSpec",
    "ReliabilityQuery",
    "DiffusionShapeFns",
    "Reliability",
    "ReliabilityResult",
    "ou_transition",
    "nested_limits",
    "nested_ratio",
    "reliability_sigma0_bound",
    "shape_fns",
    "rhat_ratio_averaged_diffusion",
    "rhat_reliability_bound",
]


@dataclass(frozen=True)
class LangevinSpec:
    """Target N(mu, sigma^2), init N(mu0, sigma0^2), horizon T, M subchains."""

    mu: float = 0.0
    sigma: float = 1.0
    mu0: float = 0.0
    sigma0: float = 0.0
    T: float = 1.0
    M: int = 1

    def __post_init__(self):
        for name in ("mu", "sigma", "mu0", "sigma0", "T"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
        if self.sigma <= 0:
            raise InvalidParameterError(f"sigma must be > 0, got {self.sigma}")
        if self.sigma0 < 0:
            raise InvalidParameterError(f"sigma0 must be >= 0, got {self.sigma0}")
        if self.T < 0:
            raise InvalidParameterError(f"T must be >= 0, got {self.T}")
        if not isinstance(self.M, (int, np.integer)) or self.M < 1:
            raise InvalidParameterError(f"M must be an integer >= 1, got {self.M!r}")


@dataclass(frozen=True)
class ReliabilityQuery:
    """Tolerances: delta on the variance-ratio scale, delta_prime on bias^2/sigma^2."""

    delta: float
    delta_prime: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise InvalidParameterError(f"delta must be > 0, got {self.delta}")
        if not (math.isfinite(self.delta_prime) and self.delta_prime > 0):
            raise InvalidParameterError(f"delta_prime must be > 0, got {self.delta_prime}")


@dataclass(frozen=True)
class DiffusionShapeFns:
    """rho_T, xi_T, eta_T: the time-average covariance shape functions."""

    rho: float
    xi: float
    eta: float


class Reliability(enum.Enum):
    TRIVIAL = "trivially-reliable"
    ALWAYS = "always-reliable"
    BOUND = "bound"
    A2_VIOLATED = "assumption-a2-violated"


@dataclass(frozen=True)
class ReliabilityResult:
    """Verdict plus the sigma0^2 lower bound when one applies.

    For the time-average (classic R-hat) query, t_star is the first time the
    squared bias reaches delta_prime * sigma^2, a2_ceiling is the largest
    delta the Theorem's second assumption admits at t_star, and
    always_reliable_delta is the delta below which any initialization is
    reliable.
    """

    verdict: Reliability
    sigma0_sq_bound: float | None = None
    t_star: float | None = None
    a2_ceiling: float | None = None
    always_reliable_delta: float | None = None


def ou_transition(spec: LangevinSpec, x0):
    """Mean and variance of X_T given X_0 = x0 (exact, any T >= 0)."""
    x0 = np.asarray(x0, dtype=np.float64)
    decay = math.exp(-spec.T)
    mean = spec.mu + (x0 - spec.mu) * decay
    variance = -spec.sigma**2 * math.expm1(-2.0 * spec.T)
    return mean, variance


def nested_limits(spec: LangevinSpec) -> tuple[float, float]:
    """Population (nB, nW) when every chain reports its state at time T.

    nW is the within-superchain spread sigma^2 (1 - e^{-2T}); nB carries the
    decaying init overdispersion plus the persistent nW/M floor.
    """
    if spec.T <= 0:
        raise InvalidParameterError("nested limits need T > 0")
    within = -spec.sigma**2 * math.expm1(-2.0 * spec.T)
    n_b = spec.sigma0**2 * math.exp(-2.0 * spec.T) + within / spec.M
    return n_b, within


def nested_ratio(spec: LangevinSpec) -> float:
    """nB/nW = 1/M + sigma0^2 / (sigma^2 (e^{2T} - 1))."""
    if spec.T <= 0:
        raise InvalidParameterError("nested_ratio needs T > 0")
    if 2.0 * spec.T > 700.0:
        return 1.0 / spec.M
    growth = math.expm1(2.0 * spec.T)
    return 1.0 / spec.M + spec.sigma0**2 / (spec.sigma**2 * growth)


def reliability_sigma0_bound(spec: LangevinSpec, query: ReliabilityQuery) -> ReliabilityResult:
    """Initial-variance condition for the nested diagnostic to be reliable.

    Reliable means: by the time nB/nW has fallen below delta, the squared
    bias is already below delta_prime * sigma^2.  Ignores spec.sigma0 and
    spec.T; the answer quantifies over them.

    Branches, in order: if the initial bias is already within tolerance the
    question is moot; if delta < 1/M the ratio can never fall below delta, so
    every initialization is reliable; otherwise reliability holds if and only
    if sigma0^2 exceeds the returned bound (0 at delta = 1/M).
    """
    bias_sq = (spec.mu0 - spec.mu) ** 2
    tol_sq = query.delta_prime * spec.sigma**2
    if bias_sq <= tol_sq:
        return ReliabilityResult(Reliability.TRIVIAL)
    if query.delta < 1.0 / spec.M:
        return ReliabilityResult(Reliability.ALWAYS)
    bound = (query.delta - 1.0 / spec.M) * (bias_sq / tol_sq - 1.0) * spec.sigma**2
    return ReliabilityResult(Reliability.BOUND, sigma0_sq_bound=bound)


_SERIES_CUTOFF = 1e-4


def shape_fns(T: float) -> DiffusionShapeFns:
    """rho_T = (1-e^{-T})/T, xi_T = (1-e^{-2T})/(2T), eta_T = 2(1-rho_T)/T.

    Small T is evaluated by 4-term Taylor expansions: the closed forms lose
    relative accuracy in (1 - rho_T) once T is comparable to sqrt(eps).
    """
    if not (math.isfinite(T) and T > 0):
        raise InvalidParameterError(f"shape functions need T > 0, got {T}")
    if T < _SERIES_CUTOFF:
        rho = 1.0 + T * (-1.0 / 2.0 + T * (1.0 / 6.0 + T * (-1.0 / 24.0)))
        xi = 1.0 + T * (-1.0 + T * (2.0 / 3.0 + T * (-1.0 / 3.0)))
        eta = 1.0 + T * (-1.0 / 3.0 + T * (1.0 / 12.0 + T * (-1.0 / 60.0)))
        return DiffusionShapeFns(rho=rho, xi=xi, eta=eta)
    rho = -math.expm1(-T) / T
    xi = -math.expm1(-2.0 * T) / (2.0 * T)
    eta = 2.0 * (1.0 - rho) / T
    return DiffusionShapeFns(rho=rho, xi=xi, eta=eta)


def rhat_ratio_averaged_diffusion(spec: LangevinSpec) -> tuple[float, float, float, float]:
    """(bias, B, W, B/W) when each chain reports its time average over (0, T].

    B is the variance of the chain averages across initializations, W the
    expected within-group variance of the averages; both are exact in the
    shape functions.
    """
    if spec.T <= 0:
        raise InvalidParameterError("averaged-diffusion ratio needs T > 0")
    f = shape_fns(spec.T)
    rho_sq = f.rho * f.rho
    var_gap = spec.sigma0**2 - spec.sigma**2
    bias = (spec.mu0 - spec.mu) * f.rho
    b = var_gap * rho_sq + spec.sigma**2 * f.eta
    w = (var_gap + (spec.mu0 - spec.mu) ** 2) * (f.xi - rho_sq) + spec.sigma**2 * (1.0 - f.eta)
    if w <= 0:
        raise DegenerateRegimeError(
            f"within-group variance limit is {w!r} at T={spec.T}; no meaningful ratio"
        )
    return bias, b, w, b / w


def _solve_t_star(bias_sq: float, sigma_sq: float, delta_prime: float) -> float:
    """T where (mu0-mu)^2 rho_T^2 = delta_prime sigma^2.

    rho_T decreases strictly from 1 to 0, so the root is unique; bisection on
    log T to 1e-12 relative width.  Caller guarantees bias_sq > tol.
    """
    target = math.sqrt(delta_prime * sigma_sq / bias_sq)
    lo, hi = 1e-8, 1.0
    while shape_fns(lo).rho < target:
        lo /= 4.0
        if lo < 1e-300:
            raise DegenerateRegimeError("bias tolerance reached at T = 0")
    while shape_fns(hi).rho > target:
        hi *= 4.0
        if hi > 1e300:
            raise DegenerateRegimeError("bias tolerance never reached")
    log_lo, log_hi = math.log(lo), math.log(hi)
    while log_hi - log_lo > 1e-12:
        mid = 0.5 * (log_lo + log_hi)
        if shape_fns(math.exp(mid)).rho > target:
            log_lo = mid
        else:
            log_hi = mid
    return math.exp(0.5 * (log_lo + log_hi))


def _half_t_coth(T: float) -> float:
    """T/2 * coth(T/2), the xi/rho^2 combination from the identity."""
    half = 0.5 * T
    if half < 1e-4:
        return 1.0 + half * half / 3.0
    return half / math.tanh(half)


def _check_ratio_decreasing(spec: LangevinSpec, t_star: float) -> None:
    """The reliability Theorem assumes B/W decreases in T (stated as a
    conjecture); verify it numerically on the horizon the proof uses."""
    grid = np.exp(np.linspace(math.log(t_star) - 3.0 * math.log(10.0), math.log(t_star), 64))
    ratios = []
    for t in grid:
        probe = LangevinSpec(
            mu=spec.mu, sigma=spec.sigma, mu0=spec.mu0,
            sigma0=spec.sigma0, T=float(t), M=spec.M,
        )
        ratios.append(rhat_ratio_averaged_diffusion(probe)[3])
    ratios = np.asarray(ratios)
    slack = 1e-9 * np.max(np.abs(ratios))
    if np.any(np.diff(ratios) > slack):
        raise AssumptionViolationError(
            "B/W is not monotone decreasing in T for this query; "
            "the sigma0 bound's derivation does not apply"
        )


def rhat_reliability_bound(spec: LangevinSpec, query: ReliabilityQuery) -> ReliabilityResult:
    """Initial-variance condition for the classic diagnostic on time averages.

    Finds t_star where the squared bias first meets delta_prime sigma^2,
    checks the Theorem's ceiling on delta there, then returns the sigma0^2
    bound that keeps B/W >= delta up to t_star.  Monotonicity of B/W (the
    Theorem's other assumption) is verified numerically at the bound.
    """
    bias_sq = (spec.mu0 - spec.mu) ** 2
    sigma_sq = spec.sigma**2
    if bias_sq <= query.delta_prime * sigma_sq:
        return ReliabilityResult(Reliability.TRIVIAL)
    t_star = _solve_t_star(bias_sq, sigma_sq, query.delta_prime)
    f = shape_fns(t_star)
    rho_sq = f.rho * f.rho
    a2_ceiling = 1.0 / (_half_t_coth(t_star) - 1.0)
    curvature = (f.xi - rho_sq) * bias_sq + (1.0 + rho_sq - f.eta - f.xi) * sigma_sq
    always_delta = (f.eta - rho_sq) * sigma_sq / curvature
    if query.delta >= a2_ceiling:
        return ReliabilityResult(
            Reliability.A2_VIOLATED,
            t_star=t_star,
            a2_ceiling=a2_ceiling,
            always_reliable_delta=always_delta,
        )
    numerator = query.delta * (f.xi - rho_sq) * bias_sq + (
        query.delta * (1.0 + rho_sq - f.eta - f.xi) - (f.eta - rho_sq)
    ) * sigma_sq
    denominator = (1.0 + query.delta) * rho_sq - query.delta * f.xi
    bound = numerator / denominator
    if bound <= 0:
        return ReliabilityResult(
            Reliability.ALWAYS,
            sigma0_sq_bound=0.0,
            t_star=t_star,
            a2_ceiling=a2_ceiling,
            always_reliable_delta=always_delta,
        )
    checked = LangevinSpec(
        mu=spec.mu, sigma=spec.sigma, mu0=spec.mu0,
        sigma0=math.sqrt(bound), T=t_star, M=spec.M,
    )
    _check_ratio_decreasing(checked, t_star)
    return ReliabilityResult(
        Reliability.BOUND,
        sigma0_sq_bound=bound,
        t_star=t_star,
        a2_ceiling=a2_ceiling,
        always_reliable_delta=always_delta,
    )
