"""Hierarchical two-compartment pharmacokinetic model.

Each of 20 patients receives unit doses into the gut compartment at t = 0,
12, 24 and is measured 12 times after each dose.  Between doses the masses
follow
    m_gut' = -k1 m_gut,    m_cent' = k1 m_gut - k2 m_cent,
whose solution over an elapsed time dt from state (g0, c0) is
    m_gut  = g0 e^{-k1 dt}
    m_cent = e^{-k2 dt} (c0 + g0 k1 dt psi(z)),   z = (k1 - k2) dt,
with psi(z) = (1 - e^{-z})/z and psi(0) = 1 covering the k1 ~ k2 limit.
Measurements are lognormal around log m_cent.  Gradients propagate analytic
sensitivities (d m/d k1, d m/d k2) through the dose events; no numerical
integration anywhere.

Parameters (D = 45):
    [log k1pop, log k2pop, log sigma1, log sigma2, log sigma,
     eta1_1..eta1_20, eta2_1..eta2_20]
with priors
    log k1pop ~ N(log 1, 0.1), log k2pop ~ N(log 0.3, 0.1),
    log sigma1 ~ N(log 0.15, 0.1), log sigma2 ~ N(log 0.35, 0.1),
    log sigma ~ N(-1, 1), eta ~ N(0, 1),
and patient rates k1_p = k1pop exp(eta1_p sigma1), k2_p = k2pop exp(eta2_p sigma2).
"""

from __future__ import annotations

import csv
from importlib import resources

import numpy as np

from ..errors import ConfigurationError, DataError
from .base import LOG_2PI, TargetModel

DATA_FILE = "pk_sim.csv"
NUM_PATIENTS = 20
DOSE_TIMES = np.array([0.0, 12.0, 24.0])
OBS_OFFSETS = np.array([0.083, 0.167, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0])
DOSE_MASS = 1.0

_PRIOR_MEAN = np.array([np.log(1.0), np.log(0.3), np.log(0.15), np.log(0.35), -1.0])
_PRIOR_SD = np.array([0.1, 0.1, 0.1, 0.1, 1.0])


def _psi(z: np.ndarray) -> np.ndarray:
    """(1 - e^{-z})/z with a series branch near the k1 = k2 singularity."""
    z = np.asarray(z, dtype=np.float64)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 0.0, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = -np.expm1(-zs) / zs
    series = 1.0 + z * (-1.0 / 2.0 + z * (1.0 / 6.0 + z * (-1.0 / 24.0 + z / 120.0)))
    return np.where(small, series, direct)


def _dpsi(z: np.ndarray) -> np.ndarray:
    """Derivative of psi; closed form (e^{-z}(1+z) - 1)/z^2 away from 0."""
    z = np.asarray(z, dtype=np.float64)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        direct = (np.exp(-zs) * (1.0 + zs) - 1.0) / (zs * zs)
    series = -1.0 / 2.0 + z * (1.0 / 3.0 + z * (-1.0 / 8.0 + z * (1.0 / 30.0 - z / 144.0)))
    return np.where(small, series, direct)


def _decay_factors(k1, k2, dt):
    """e^{-k1 dt}, e^{-k2 dt}, and the fused products
        ephi  = e^{-k2 dt} dt psi(z),
        edpsi = e^{-k2 dt} dt^2 psi'(z),      z = (k1 - k2) dt.

    psi(z) grows like e^{|z|} for z << 0, so the factors are fused before
    evaluation: e^{-b} psi(a - b) = e^{-min(a,b)} psi(|a - b|), which keeps
    every intermediate in [0, 1] for any positive rates.  Same trick for
    psi' via e^{-b} psi'(z) = (e^{-a}(1 + z) - e^{-b}) / z^2.
    """
    a = k1 * dt
    b = k2 * dt
    z = a - b
    e1 = np.exp(-a)
    e2 = np.exp(-b)
    az = np.abs(z)
    small = az < 1e-3
    az_safe = np.where(small, 1.0, az)
    z_small = np.where(small, z, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        psi_abs = np.where(small, 1.0, -np.expm1(-az_safe) / az_safe)
        dpsi_fused = (e1 * (1.0 + z) - e2) / (az_safe * az_safe)
    ephi = dt * np.where(z >= 0, e2, e1) * psi_abs
    ephi = np.where(small, dt * e2 * _psi(z_small), ephi)
    edpsi = dt * dt * np.where(small, e2 * _dpsi(z_small), dpsi_fused)
    return e1, e2, ephi, edpsi


def _segment(g0, c0, k1, k2, dt):
    """Evolve (gut, central) masses over elapsed dt.  Inputs broadcast."""
    e1, e2, ephi, _ = _decay_factors(k1, k2, dt)
    c = e2 * c0 + g0 * k1 * ephi
    return g0 * e1, c


def _segment_with_partials(state, k1, k2, dt):
    """One analytic step of the mass ODE and its k1/k2 sensitivities.

    state = (g, c, dg1, dg2, dc1, dc2); dt may carry a trailing axis of
    evaluation offsets, in which case the returned tuple is pointwise.
    """
    g0, c0, dg1, dg2, dc1, dc2 = state
    e1, e2, ephi, edpsi = _decay_factors(k1, k2, dt)
    c = e2 * c0 + g0 * k1 * ephi
    g = g0 * e1
    new_dg1 = e1 * (dg1 - dt * g0)
    new_dg2 = e1 * dg2
    new_dc1 = e2 * dc1 + k1 * ephi * dg1 + g0 * ephi + g0 * k1 * edpsi
    new_dc2 = -dt * c + e2 * dc2 + k1 * ephi * dg2 - g0 * k1 * edpsi
    return g, c, new_dg1, new_dg2, new_dc1, new_dc2


def _central_mass_with_partials(k1, k2):
    """Central mass and sensitivities at every observation time.

    k1, k2 shaped (..., P); returns three arrays shaped (..., P, W, T) for
    the W = 3 dose windows and T = 12 offsets.
    """
    zeros = np.zeros_like(k1)
    state = (np.full_like(k1, DOSE_MASS), zeros, zeros, zeros, zeros, zeros)
    cs, d1s, d2s = [], [], []
    k1x = k1[..., None]
    k2x = k2[..., None]
    for w in range(len(DOSE_TIMES)):
        statx = tuple(s[..., None] for s in state)
        _, c, _, _, dc1, dc2 = _segment_with_partials(statx, k1x, k2x, OBS_OFFSETS)
        cs.append(c)
        d1s.append(dc1)
        d2s.append(dc2)
        if w + 1 < len(DOSE_TIMES):
            span = DOSE_TIMES[w + 1] - DOSE_TIMES[w]
            g, c0, dg1, dg2, dc1, dc2 = _segment_with_partials(state, k1, k2, span)
            state = (g + DOSE_MASS, c0, dg1, dg2, dc1, dc2)
    return (np.stack(cs, axis=-2), np.stack(d1s, axis=-2), np.stack(d2s, axis=-2))


def mass_profiles(times: np.ndarray, k1: float, k2: float) -> tuple[np.ndarray, np.ndarray]:
    """Gut and central masses at absolute times under the dosing schedule.

    Used by tests to confirm the analytic solution satisfies the ODE between
    dose events.
    """
    times = np.asarray(times, dtype=np.float64)
    if (times < 0).any():
        raise DataError("times must be non-negative")
    g = np.empty_like(times)
    c = np.empty_like(times)
    state_g, state_c = DOSE_MASS, 0.0
    for w, t0 in enumerate(DOSE_TIMES):
        upper = DOSE_TIMES[w + 1] if w + 1 < len(DOSE_TIMES) else np.inf
        in_window = (times >= t0) & (times < upper)
        gw, cw = _segment(state_g, state_c, k1, k2, times[in_window] - t0)
        g[in_window] = gw
        c[in_window] = cw
        if w + 1 < len(DOSE_TIMES):
            state_g, state_c = _segment(state_g, state_c, k1, k2, upper - t0)
            state_g += DOSE_MASS
    return g, c


def load_pk_data(path=None) -> np.ndarray:
    """Observed concentrations shaped (patients, windows, offsets)."""
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
            raise ConfigurationError(f"cannot read pk data: {exc}") from None
        source = str(path)
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["patient", "time", "dose_event", "concentration"]:
        raise DataError(f"{source}: expected header patient,time,dose_event,concentration")
    y = np.full((NUM_PATIENTS, len(DOSE_TIMES), len(OBS_OFFSETS)), np.nan)
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            patient, t, window, conc = int(row[0]), float(row[1]), int(row[2]), float(row[3])
        except (ValueError, IndexError) as exc:
            raise DataError(f"{source}: line {lineno}: {exc}") from None
        if not 0 <= patient < NUM_PATIENTS or not 0 <= window < len(DOSE_TIMES):
            raise DataError(f"{source}: line {lineno}: patient/window out of range")
        offset = t - DOSE_TIMES[window]
        matches = np.flatnonzero(np.isclose(OBS_OFFSETS, offset, rtol=0, atol=1e-9))
        if matches.size != 1:
            raise DataError(f"{source}: line {lineno}: time {t} not on the observation grid")
        if conc <= 0:
            raise DataError(f"{source}: line {lineno}: concentration must be positive")
        y[patient, window, matches[0]] = conc
    if np.isnan(y).any():
        raise DataError(f"{source}: incomplete observation grid")
    return y


def pharmacokinetics(data_path=None) -> TargetModel:
    y = load_pk_data(data_path)
    log_y = np.log(y)
    dim = 5 + 2 * NUM_PATIENTS
    n_obs = y.size

    def _unpack(theta):
        pop = theta[..., :5]
        eta1 = theta[..., 5 : 5 + NUM_PATIENTS]
        eta2 = theta[..., 5 + NUM_PATIENTS :]
        sigma1 = np.exp(pop[..., 2])
        sigma2 = np.exp(pop[..., 3])
        k1 = np.exp(pop[..., 0][..., None] + eta1 * sigma1[..., None])
        k2 = np.exp(pop[..., 1][..., None] + eta2 * sigma2[..., None])
        return pop, eta1, eta2, sigma1, sigma2, k1, k2

    def log_density(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        pop, eta1, eta2, _, _, k1, k2 = _unpack(theta)
        zp = (pop - _PRIOR_MEAN) / _PRIOR_SD
        lp = -0.5 * np.sum(zp * zp, axis=-1) - np.sum(np.log(_PRIOR_SD)) - 2.5 * LOG_2PI
        lp = lp - 0.5 * np.sum(eta1 * eta1, axis=-1) - 0.5 * np.sum(eta2 * eta2, axis=-1)
        lp = lp - NUM_PATIENTS * LOG_2PI
        c, _, _ = _central_mass_with_partials(k1, k2)
        sigma = np.exp(theta[..., 4])
        with np.errstate(divide="ignore"):
            resid = log_y - np.log(c)
        lp = lp - 0.5 * np.sum(resid * resid, axis=(-3, -2, -1)) / sigma**2
        lp = lp - n_obs * (theta[..., 4] + 0.5 * LOG_2PI) - np.sum(log_y)
        return lp

    def gradient(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        pop, eta1, eta2, sigma1, sigma2, k1, k2 = _unpack(theta)
        grad = np.zeros_like(theta)
        grad[..., :5] = -(pop - _PRIOR_MEAN) / _PRIOR_SD**2
        grad[..., 5 : 5 + NUM_PATIENTS] = -eta1
        grad[..., 5 + NUM_PATIENTS :] = -eta2
        c, dc1, dc2 = _central_mass_with_partials(k1, k2)
        sigma = np.exp(theta[..., 4])
        inv_var = (1.0 / sigma**2)[..., None, None, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            resid = log_y - np.log(c)
            # d loglik / d k per patient, via d log c / d k = dc/dk / c
            dk1 = np.sum(resid * inv_var * dc1 / c, axis=(-2, -1))
            dk2 = np.sum(resid * inv_var * dc2 / c, axis=(-2, -1))
        # chain rule through k_p = exp(log kpop + eta_p * sigma_pop)
        grad[..., 0] += np.sum(dk1 * k1, axis=-1)
        grad[..., 1] += np.sum(dk2 * k2, axis=-1)
        grad[..., 2] += np.sum(dk1 * k1 * eta1, axis=-1) * sigma1
        grad[..., 3] += np.sum(dk2 * k2 * eta2, axis=-1) * sigma2
        grad[..., 4] += np.sum(resid * resid, axis=(-3, -2, -1)) / sigma**2 - n_obs
        grad[..., 5 : 5 + NUM_PATIENTS] += dk1 * k1 * sigma1[..., None]
        grad[..., 5 + NUM_PATIENTS :] += dk2 * k2 * sigma2[..., None]
        return grad

    return TargetModel("pharmacokinetics", dim, log_density, gradient, None)
