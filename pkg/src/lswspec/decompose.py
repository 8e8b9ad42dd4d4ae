"""Time-varying MA form of a single scale and its state-space decomposition.

With random-walk amplitudes ``w_jt = w_{j,t-1} + zeta_jt`` the scale-``j``
component splits, for ``t >= 2**j``, into

``x_jt = A_jt * w_{j,t-2**j+1} + nu_jt``

where ``A_jt = sum_k psi_j[k] * xi_{j,t-k}`` is a known design given the
innovations and ``nu_jt`` collects the amplitude increments inside the wavelet
support.  ``nu_jt`` has mean zero and variance
``sigma_j**2 * sum_k psi_j[k]**2 * (2**j - k - 1)``; summed over scales this
yields a linear-Gaussian model with identity transition for the lagged
amplitude vector ``(w_{1,t-1}, ..., w_{J,t-2**J+1})``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .wavelet import DEFAULT_MAX_SCALE, haar_coeffs, validate_scale

__all__ = [
    "TvmaCoeffs",
    "StateSpaceModel",
    "tvma_coeffs",
    "eval_tvma",
    "eval_decomposed",
    "build_design",
    "design_series",
    "obs_noise_variance",
    "assemble_model",
]


def _window(name: str, series: np.ndarray, start: int, t_hi: int, count: int) -> np.ndarray:
    """Values of ``series`` at times ``t_hi, t_hi - 1, ..., t_hi - count + 1``
    where ``series[i]`` holds time ``start + i``."""
    series = np.asarray(series, dtype=float)
    lo_idx = t_hi - count + 1 - start
    hi_idx = t_hi - start
    if lo_idx < 0 or hi_idx >= series.shape[0]:
        raise ConfigurationError(
            f"{name} does not cover times {t_hi - count + 1}..{t_hi} "
            f"(have {start}..{start + series.shape[0] - 1})"
        )
    return series[lo_idx:hi_idx + 1][::-1]


@dataclass(frozen=True)
class TvmaCoeffs:
    """Moving-average coefficients of one scale at one time point;
    ``alpha[l]`` multiplies the innovation ``l`` steps back."""

    j: int
    t: int
    alpha: np.ndarray


def tvma_coeffs(
    j: int,
    t: int,
    w_path: np.ndarray,
    path_start: int = 0,
    max_scale: int = DEFAULT_MAX_SCALE,
) -> TvmaCoeffs:
    """Coefficients ``alpha[l] = psi_j[l] * w_{j,t-l}`` for lags ``0..2**j - 1``."""
    j = validate_scale(j, max_scale)
    psi = haar_coeffs(j, max_scale)
    w = _window("amplitude path", w_path, path_start, t, psi.shape[0])
    return TvmaCoeffs(j=j, t=t, alpha=psi * w)


def eval_tvma(
    j: int,
    t: int,
    w_path: np.ndarray,
    xi: np.ndarray,
    path_start: int = 0,
    xi_start: int = 0,
    max_scale: int = DEFAULT_MAX_SCALE,
) -> float:
    """Scale component ``x_jt = sum_l psi_j[l] * w_{j,t-l} * xi_{j,t-l}``."""
    coeffs = tvma_coeffs(j, t, w_path, path_start, max_scale)
    draws = _window("innovation draws", xi, xi_start, t, coeffs.alpha.shape[0])
    return float(coeffs.alpha @ draws)


def eval_decomposed(
    j: int,
    t: int,
    w_anchor: float,
    xi: np.ndarray,
    zeta: np.ndarray,
    xi_start: int = 0,
    zeta_start: int = 0,
    max_scale: int = DEFAULT_MAX_SCALE,
) -> float:
    """Evaluate the anchored form ``A_jt * w_anchor + nu_jt``.

    ``w_anchor`` is the amplitude at ``t - 2**j + 1`` and ``zeta`` holds the
    amplitude increments; the correction term is
    ``sum_{k=0}^{2**j-2} sum_{m=k}^{2**j-2} psi_j[k] xi_{t-k} zeta_{t-m}``.
    Requires ``t >= 2**j``.
    """
    j = validate_scale(j, max_scale)
    support = 2 ** j
    if t < support:
        raise ConfigurationError(
            f"decomposed form needs t >= {support} at scale {j}, got t={t}"
        )
    psi = haar_coeffs(j, max_scale)
    draws = _window("innovation draws", xi, xi_start, t, support)
    design = float(psi @ draws)
    steps = _window("amplitude increments", zeta, zeta_start, t, support - 1)
    correction = 0.0
    for k in range(support - 1):
        for m in range(k, support - 1):
            correction += psi[k] * draws[k] * steps[m]
    return design * float(w_anchor) + correction


def build_design(
    j: int,
    t: int,
    xi: np.ndarray,
    xi_start: int = 0,
    max_scale: int = DEFAULT_MAX_SCALE,
) -> float:
    """Design entry ``A_jt = sum_k psi_j[k] * xi_{j,t-k}``."""
    j = validate_scale(j, max_scale)
    psi = haar_coeffs(j, max_scale)
    draws = _window("innovation draws", xi, xi_start, t, psi.shape[0])
    return float(psi @ draws)


def design_series(
    j: int,
    xi: np.ndarray,
    xi_start: int,
    t_lo: int,
    t_hi: int,
    max_scale: int = DEFAULT_MAX_SCALE,
) -> np.ndarray:
    """Vectorised ``A_jt`` for ``t = t_lo..t_hi`` (inclusive)."""
    j = validate_scale(j, max_scale)
    psi = haar_coeffs(j, max_scale)
    xi = np.asarray(xi, dtype=float)
    if t_lo - (psi.shape[0] - 1) < xi_start or t_hi - xi_start >= xi.shape[0]:
        raise ConfigurationError(
            f"innovation draws do not cover times {t_lo - psi.shape[0] + 1}..{t_hi}"
        )
    full = np.convolve(xi, psi)
    return full[t_lo - xi_start:t_hi - xi_start + 1]


def obs_noise_variance(j: int, sigma2_j: float, max_scale: int = DEFAULT_MAX_SCALE) -> float:
    """Variance contributed by scale ``j`` amplitude increments inside the
    wavelet support: ``sigma2_j * sum_k psi_j[k]**2 * (2**j - k - 1)``."""
    j = validate_scale(j, max_scale)
    if sigma2_j < 0:
        raise ConfigurationError(f"sigma2 must be non-negative, got {sigma2_j}")
    psi = haar_coeffs(j, max_scale)
    support = psi.shape[0]
    counts = support - 1 - np.arange(support)
    return float(sigma2_j * np.sum(psi ** 2 * counts))


@dataclass
class StateSpaceModel:
    """Linear-Gaussian model for the lagged amplitude vector.

    ``designs[i]`` is the design row for time ``start_time + i``; rows beyond
    the observed sample, if present, support out-of-sample prediction.  The
    state transition is the identity with diagonal noise ``state_noise`` and
    the scalar observation noise variance is ``obs_var``.
    """

    n_scales: int
    start_time: int
    designs: np.ndarray
    obs_var: float
    state_noise: np.ndarray
    prior_mean: np.ndarray
    prior_var: np.ndarray

    def design_at(self, t: int) -> np.ndarray:
        i = t - self.start_time
        if i < 0 or i >= self.designs.shape[0]:
            raise ConfigurationError(f"no design vector for time {t}")
        return self.designs[i]


def assemble_model(
    n_scales: int,
    sigma2,
    xi: np.ndarray,
    xi_start: int,
    length: int,
    horizon: int = 0,
    prior_mean=None,
    prior_var=None,
    max_scale: int = DEFAULT_MAX_SCALE,
) -> StateSpaceModel:
    """Build the state-space model from simulated innovations.

    ``xi`` has one row per scale, row ``j-1`` holding draws from time
    ``xi_start`` on.  Designs are produced for ``t = 2**n_scales ..
    length - 1 + horizon``; the state at time ``t`` is
    ``(w_{1,t-1}, ..., w_{J,t-2**J+1})``.
    """
    n_scales = validate_scale(n_scales, max_scale)
    sigma2 = np.atleast_1d(np.asarray(sigma2, dtype=float))
    if sigma2.shape[0] == 1:
        sigma2 = np.repeat(sigma2, n_scales)
    if sigma2.shape[0] != n_scales:
        raise ConfigurationError(
            f"sigma2 has {sigma2.shape[0]} entries for {n_scales} scales"
        )
    if np.any(sigma2 < 0):
        raise ConfigurationError("sigma2 entries must be non-negative")
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 2 or xi.shape[0] != n_scales:
        raise ConfigurationError(
            f"innovation draws must have shape (n_scales, n), got {xi.shape}"
        )
    if horizon < 0:
        raise ConfigurationError(f"horizon must be non-negative, got {horizon}")
    start = 2 ** n_scales
    t_hi = length - 1 + horizon
    if t_hi < start:
        raise ConfigurationError(
            f"series of length {length} too short for start time {start}"
        )
    designs = np.column_stack(
        [
            design_series(j, xi[j - 1], xi_start, start, t_hi, max_scale)
            for j in range(1, n_scales + 1)
        ]
    )
    obs_var = float(sum(obs_noise_variance(j, sigma2[j - 1], max_scale)
                        for j in range(1, n_scales + 1)))
    if prior_mean is None:
        prior_mean = np.zeros(n_scales)
    prior_mean = np.asarray(prior_mean, dtype=float).reshape(n_scales)
    if prior_var is None:
        prior_var = np.eye(n_scales) * 1e6
    prior_var = np.asarray(prior_var, dtype=float)
    if prior_var.shape != (n_scales, n_scales):
        raise ConfigurationError(
            f"prior variance must be ({n_scales}, {n_scales}), got {prior_var.shape}"
        )
    return StateSpaceModel(
        n_scales=n_scales,
        start_time=start,
        designs=designs,
        obs_var=obs_var,
        state_noise=sigma2.copy(),
        prior_mean=prior_mean,
        prior_var=prior_var,
    )
